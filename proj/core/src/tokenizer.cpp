#include "dlcf/tokenizer.hpp"

#include <cctype>

#include "dlcf/errors.hpp"

namespace dlcf {

namespace {

bool is_space(unsigned char c) { return c < 0x80 && std::isspace(c); }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
    } else if (is_punct(c)) {
      tokens.push_back({std::string(1, text[i]), i, i + 1});
      ++i;
    } else {
      const std::size_t start = i;
      while (i < text.size() && !is_space(static_cast<unsigned char>(text[i])) &&
             !is_punct(static_cast<unsigned char>(text[i]))) {
        ++i;
      }
      std::string word(text.substr(start, i - start));
      for (auto& ch : word) {
        if (static_cast<unsigned char>(ch) < 0x80) ch = static_cast<char>(std::tolower(ch));
      }
      tokens.push_back({std::move(word), start, i});
    }
  }
  return tokens;
}

AspectSpan char_span_to_token_span(const std::vector<Token>& tokens, std::size_t from,
                                   std::size_t to) {
  bool found = false;
  AspectSpan span{0, 0, from, to};
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].from < to && tokens[t].to > from) {
      if (!found) span.token_start = t;
      span.token_end = t;
      found = true;
    }
  }
  if (!found) {
    throw AlignmentError("character span [" + std::to_string(from) + ", " + std::to_string(to) +
                         ") overlaps no token");
  }
  return span;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) n += is_continuation(static_cast<unsigned char>(c)) ? 0 : 1;
  return n;
}

std::size_t utf8_byte_offset(std::string_view s, std::size_t index) {
  std::size_t seen = 0;
  for (std::size_t b = 0; b < s.size(); ++b) {
    if (is_continuation(static_cast<unsigned char>(s[b]))) continue;
    if (seen == index) return b;
    ++seen;
  }
  if (seen == index) return s.size();
  throw IndexError("code point " + std::to_string(index) + " beyond string of " +
                   std::to_string(seen) + " code points");
}

}  // namespace dlcf
