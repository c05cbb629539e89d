#pragma once

/// PPCO XML reader and writer.
///
///   <ppco version="1">
///     <items>
///       <item id="..." kind="..." name="...">
///         <attr name="...">value</attr>*
///         <description>text</description>?
///       </item>*
///     </items>
///     <relationships>
///       <rel source="..." target="..." kind="..." weight="0"/>*
///     </relationships>
///   </ppco>
///
/// Unknown elements or attributes are rejected with a path-bearing
/// SchemaViolation. Output is deterministic: items and relationships are
/// written in canonical (sorted) order.

#include <charconv>
#include <cmath>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vlens/error.hpp"
#include "vlens/ppco.hpp"
#include "vlens/xml.hpp"

namespace vlens {

namespace schema {

inline std::string child_path(const std::string& parent, const xml::Node& child, std::size_t nth) {
  return parent + "/" + child.name + "[" + std::to_string(nth) + "]";
}

inline void check_attributes(const xml::Node& node, const std::string& path,
                             std::initializer_list<std::string_view> required,
                             std::initializer_list<std::string_view> optional = {}) {
  for (const auto& [key, value] : node.attributes) {
    bool known = false;
    for (auto r : required) known = known || r == key;
    for (auto o : optional) known = known || o == key;
    if (!known) throw Error::schema_violation(path, "unexpected attribute '" + key + "'");
  }
  for (auto r : required)
    if (node.attribute(r) == nullptr)
      throw Error::schema_violation(path, "missing attribute '" + std::string(r) + "'");
}

inline void check_no_text(const xml::Node& node, const std::string& path) {
  if (!xml::is_blank(node.text))
    throw Error::schema_violation(path, "unexpected character data");
}

inline void check_leaf(const xml::Node& node, const std::string& path) {
  if (!node.children.empty())
    throw Error::schema_violation(path, "unexpected child element <" + node.children.front().name + ">");
}

inline double parse_non_negative(std::string_view text, const std::string& path,
                                 std::string_view what) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value) ||
      value < 0.0)
    throw Error::schema_violation(
        path, std::string(what) + " '" + std::string(text) + "' is not a non-negative decimal");
  return value;
}

inline double parse_unit_interval(std::string_view text, const std::string& path,
                                  std::string_view what) {
  double value = parse_non_negative(text, path, what);
  if (value > 1.0)
    throw Error::schema_violation(path, std::string(what) + " must lie in [0, 1]");
  return value;
}

/// Shortest fixed-notation text that reads back to the same double.
inline std::string format_decimal(double value) {
  char buf[512];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  if (ec != std::errc{}) {
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    end = res.ptr;
  }
  return std::string(buf, end);
}

}  // namespace schema

namespace detail {

inline InformationItem read_item(const xml::Node& node, const std::string& path) {
  schema::check_attributes(node, path, {"id", "kind", "name"});
  schema::check_no_text(node, path);

  InformationItem item;
  item.id = *node.attribute("id");
  item.name = *node.attribute("name");
  auto kind = parse_item_kind(*node.attribute("kind"));
  if (!kind) throw Error::schema_violation(path, "unknown item kind '" + *node.attribute("kind") + "'");
  item.kind = *kind;

  std::size_t attr_count = 0, description_count = 0;
  for (const auto& child : node.children) {
    if (child.name == "attr") {
      auto child_path = schema::child_path(path, child, ++attr_count);
      schema::check_attributes(child, child_path, {"name"});
      schema::check_leaf(child, child_path);
      if (!item.attributes.emplace(*child.attribute("name"), child.text).second)
        throw Error::schema_violation(child_path,
                                      "duplicate attribute '" + *child.attribute("name") + "'");
    } else if (child.name == "description") {
      auto child_path = schema::child_path(path, child, ++description_count);
      if (description_count > 1) throw Error::schema_violation(child_path, "more than one description");
      schema::check_attributes(child, child_path, {});
      schema::check_leaf(child, child_path);
      item.description = child.text;
    } else {
      throw Error::schema_violation(path, "unexpected element <" + child.name + ">");
    }
  }
  return item;
}

inline Relationship read_relationship(const xml::Node& node, const std::string& path) {
  schema::check_attributes(node, path, {"source", "target", "kind"}, {"weight"});
  schema::check_leaf(node, path);
  schema::check_no_text(node, path);

  Relationship rel;
  rel.source = *node.attribute("source");
  rel.target = *node.attribute("target");
  auto kind = parse_relation_kind(*node.attribute("kind"));
  if (!kind)
    throw Error::schema_violation(path, "unknown relationship kind '" + *node.attribute("kind") + "'");
  rel.kind = *kind;
  if (const auto* weight = node.attribute("weight"))
    rel.weight = schema::parse_non_negative(*weight, path, "weight");
  return rel;
}

}  // namespace detail

/// Builds a graph from an already-parsed `<ppco>` element. `path` is the
/// element's location, used to prefix schema errors.
inline PpcoGraph graph_from_xml(const xml::Node& root, const std::string& path = "/ppco") {
  if (root.name != "ppco") throw Error::schema_violation("/" + root.name, "root element must be <ppco>");
  schema::check_attributes(root, path, {"version"});
  if (*root.attribute("version") != "1")
    throw Error::schema_violation(path, "unsupported version '" + *root.attribute("version") + "'");
  schema::check_no_text(root, path);

  const xml::Node* items_node = nullptr;
  const xml::Node* rels_node = nullptr;
  for (const auto& child : root.children) {
    if (child.name == "items" && items_node == nullptr && rels_node == nullptr) {
      items_node = &child;
    } else if (child.name == "relationships" && items_node != nullptr && rels_node == nullptr) {
      rels_node = &child;
    } else {
      throw Error::schema_violation(path, "unexpected element <" + child.name + ">");
    }
  }
  if (items_node == nullptr) throw Error::schema_violation(path, "missing <items>");
  if (rels_node == nullptr) throw Error::schema_violation(path, "missing <relationships>");

  std::vector<InformationItem> items;
  const std::string items_path = path + "/items";
  schema::check_attributes(*items_node, items_path, {});
  schema::check_no_text(*items_node, items_path);
  for (const auto& child : items_node->children) {
    auto child_path = schema::child_path(items_path, child, items.size() + 1);
    if (child.name != "item") throw Error::schema_violation(items_path, "unexpected element <" + child.name + ">");
    items.push_back(detail::read_item(child, child_path));
  }

  std::vector<Relationship> rels;
  const std::string rels_path = path + "/relationships";
  schema::check_attributes(*rels_node, rels_path, {});
  schema::check_no_text(*rels_node, rels_path);
  for (const auto& child : rels_node->children) {
    auto child_path = schema::child_path(rels_path, child, rels.size() + 1);
    if (child.name != "rel") throw Error::schema_violation(rels_path, "unexpected element <" + child.name + ">");
    rels.push_back(detail::read_relationship(child, child_path));
  }

  try {
    return build_graph(std::move(items), std::move(rels));
  } catch (const Error& e) {
    throw Error::graph_invalid(e);
  }
}

/// Parses a PPCO document. Errors: MalformedXml, SchemaViolation,
/// GraphInvalid (with the build_graph failure as `cause()`).
inline PpcoGraph parse_ppco(std::string_view document) {
  return graph_from_xml(xml::parse(document));
}

/// Appends the `<ppco>` element, each line prefixed by `indent`.
inline void append_ppco(std::string& out, const PpcoGraph& graph, const std::string& indent = "") {
  out += indent + "<ppco version=\"1\">\n";

  if (graph.items().empty()) {
    out += indent + "  <items/>\n";
  } else {
    out += indent + "  <items>\n";
    for (const auto& item : graph.items()) {
      out += indent + "    <item";
      xml::append_attribute(out, "id", item.id);
      xml::append_attribute(out, "kind", to_string(item.kind));
      xml::append_attribute(out, "name", item.name);
      if (item.attributes.empty() && item.description.empty()) {
        out += "/>\n";
        continue;
      }
      out += ">\n";
      for (const auto& [key, value] : item.attributes) {
        out += indent + "      <attr";
        xml::append_attribute(out, "name", key);
        out += '>';
        xml::append_escaped_text(out, value);
        out += "</attr>\n";
      }
      if (!item.description.empty()) {
        out += indent + "      <description>";
        xml::append_escaped_text(out, item.description);
        out += "</description>\n";
      }
      out += indent + "    </item>\n";
    }
    out += indent + "  </items>\n";
  }

  if (graph.relationships().empty()) {
    out += indent + "  <relationships/>\n";
  } else {
    out += indent + "  <relationships>\n";
    for (const auto& rel : graph.relationships()) {
      out += indent + "    <rel";
      xml::append_attribute(out, "source", rel.source);
      xml::append_attribute(out, "target", rel.target);
      xml::append_attribute(out, "kind", to_string(rel.kind));
      xml::append_attribute(out, "weight", schema::format_decimal(rel.weight));
      out += "/>\n";
    }
    out += indent + "  </relationships>\n";
  }

  out += indent + "</ppco>\n";
}

inline std::string serialize_ppco(const PpcoGraph& graph) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  append_ppco(out, graph);
  return out;
}

}  // namespace vlens
