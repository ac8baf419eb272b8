#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dlcf/dataset.hpp"
#include "dlcf/example.hpp"

namespace dlcf {

// Token <-> id table. Ids 0..3 are [PAD], [UNK], [CLS], [SEP].
class Vocab {
 public:
  Vocab();

  // Tokens seen at least `min_count` times, ordered by frequency (desc) then
  // lexicographically.
  static Vocab build(std::span<const std::vector<std::string>> corpus, std::size_t min_count = 1);
  static Vocab build(std::span<const TokenizedAnnotation> corpus, std::size_t min_count = 1);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  // kUnkId for unknown tokens.
  int id(std::string_view token) const;
  const std::string& token(int id) const;

  std::vector<int> encode(std::span<const Token> tokens) const;
  std::vector<int> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const int> ids) const;

  // One token per line, reserved names first; line index == id.
  std::string to_text() const;
  static Vocab from_text(std::string_view text);

  bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

inline constexpr std::string_view kReservedTokens[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

Example encode_example(const TokenizedAnnotation& annotation, const Vocab& vocab);
std::vector<Example> encode_examples(std::span<const TokenizedAnnotation> annotations,
                                     const Vocab& vocab);

}  // namespace dlcf
