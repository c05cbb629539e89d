#pragma once

// Minimal element tree on top of expat. Only what the PPCO and catalog
// formats need: elements, attributes, character data, source positions.

#include <expat.h>

#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vlens/error.hpp"

namespace vlens::xml {

struct Node {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;  // document order
  std::vector<Node> children;
  std::string text;  // character data directly inside this element
  long line = 0;
  long column = 0;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
      if (k == key) return &v;
    return nullptr;
  }
};

namespace detail {

struct ParseState {
  XML_Parser parser = nullptr;
  Node root;
  bool have_root = false;
  std::vector<Node*> open;
  bool saw_doctype = false;
};

inline void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* state = static_cast<ParseState*>(user);
  Node* node = nullptr;
  if (state->open.empty()) {
    node = &state->root;
    state->have_root = true;
  } else {
    state->open.back()->children.emplace_back();
    node = &state->open.back()->children.back();
  }
  node->name = name;
  node->line = static_cast<long>(XML_GetCurrentLineNumber(state->parser));
  node->column = static_cast<long>(XML_GetCurrentColumnNumber(state->parser)) + 1;
  for (std::size_t i = 0; attrs[i] != nullptr; i += 2) node->attributes.emplace_back(attrs[i], attrs[i + 1]);
  state->open.push_back(node);
}

inline void on_end(void* user, const XML_Char*) {
  static_cast<ParseState*>(user)->open.pop_back();
}

inline void on_text(void* user, const XML_Char* s, int len) {
  auto* state = static_cast<ParseState*>(user);
  if (!state->open.empty()) state->open.back()->text.append(s, static_cast<std::size_t>(len));
}

inline void on_doctype(void* user, const XML_Char*, const XML_Char*, const XML_Char*, int) {
  auto* state = static_cast<ParseState*>(user);
  state->saw_doctype = true;
  XML_StopParser(state->parser, XML_FALSE);
}

struct ParserDeleter {
  void operator()(XML_ParserStruct* p) const noexcept { XML_ParserFree(p); }
};

}  // namespace detail

/// Parses a UTF-8 document. Throws MalformedXml with a 1-based position, or
/// SchemaViolation for a DOCTYPE (entity declarations are not accepted).
inline Node parse(std::string_view document) {
  std::unique_ptr<XML_ParserStruct, detail::ParserDeleter> parser(XML_ParserCreate("UTF-8"));
  if (!parser) throw Error(ErrorCode::IoError, "cannot allocate XML parser");

  detail::ParseState state;
  state.parser = parser.get();
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), detail::on_start, detail::on_end);
  XML_SetCharacterDataHandler(parser.get(), detail::on_text);
  XML_SetStartDoctypeDeclHandler(parser.get(), detail::on_doctype);

  if (document.size() > static_cast<std::size_t>(std::numeric_limits<int>::max()))
    throw Error(ErrorCode::InvalidArgument, "document exceeds 2 GiB");

  auto status = XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), 1);
  if (state.saw_doctype) throw Error::schema_violation("/", "DOCTYPE declarations are not accepted");
  if (status != XML_STATUS_OK) {
    auto line = static_cast<long>(XML_GetCurrentLineNumber(parser.get()));
    auto column = static_cast<long>(XML_GetCurrentColumnNumber(parser.get())) + 1;
    throw Error::malformed_xml(line, column, XML_ErrorString(XML_GetErrorCode(parser.get())));
  }
  if (!state.have_root) throw Error::malformed_xml(1, 1, "no root element");
  return std::move(state.root);
}

inline bool is_blank(std::string_view text) noexcept {
  return text.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

inline void append_escaped_text(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
}

// Whitespace is written as character references so attribute-value
// normalization cannot alter it on re-parse.
inline void append_escaped_attribute(std::string& out, std::string_view text) {
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\t': out += "&#9;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
}

/// Appends ` key="value"` with escaping.
inline void append_attribute(std::string& out, std::string_view key, std::string_view value) {
  out += ' ';
  out += key;
  out += "=\"";
  append_escaped_attribute(out, value);
  out += '"';
}

}  // namespace vlens::xml
