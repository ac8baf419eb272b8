#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dlcf/lcf.hpp"

namespace dlcf {

// A lowercased token and the [from, to) byte range it came from.
struct Token {
  std::string text;
  std::size_t from = 0;
  std::size_t to = 0;

  bool operator==(const Token&) const = default;
};

// Lowercases ASCII, splits on whitespace, and emits every ASCII punctuation
// character as its own token. Bytes >= 0x80 are word characters, so UTF-8
// sequences are never split.
std::vector<Token> tokenize(std::string_view text);

// Smallest inclusive token range covering every token that overlaps the byte
// range [from, to). Throws AlignmentError when nothing overlaps.
AspectSpan char_span_to_token_span(const std::vector<Token>& tokens, std::size_t from,
                                   std::size_t to);

// Number of code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);
// Byte offset of code point `index` (index == utf8_length(s) maps to s.size()).
std::size_t utf8_byte_offset(std::string_view s, std::size_t index);

}  // namespace dlcf
