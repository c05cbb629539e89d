#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vlens {

// Bytes >= 0x80 count as token characters so UTF-8 words stay whole.
constexpr bool is_token_char(unsigned char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

constexpr char ascii_lower(char c) noexcept {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

/// Lowercase, split on every non-alphanumeric byte, drop empty tokens.
/// No stemming and no stop-words.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    if (is_token_char(static_cast<unsigned char>(raw))) {
      current.push_back(ascii_lower(raw));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline bool is_normalized_token(std::string_view token) noexcept {
  if (token.empty()) return false;
  for (char c : token) {
    auto u = static_cast<unsigned char>(c);
    if (!is_token_char(u) || (c >= 'A' && c <= 'Z')) return false;
  }
  return true;
}

}  // namespace vlens
