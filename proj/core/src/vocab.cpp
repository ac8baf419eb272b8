#include "dlcf/vocab.hpp"

#include <algorithm>
#include <map>

#include "dlcf/errors.hpp"

namespace dlcf {

Vocab::Vocab() {
  for (auto name : kReservedTokens) add(std::string(name));
}

void Vocab::add(std::string token) {
  const int id = static_cast<int>(tokens_.size());
  if (!ids_.emplace(token, id).second) throw FormatError("duplicate vocabulary token '" + token + "'");
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(std::span<const std::vector<std::string>> corpus, std::size_t min_count) {
  if (min_count < 1) throw ContractError("min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus)
    for (const auto& tok : sentence) ++counts[tok];
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    const bool reserved = std::find(std::begin(kReservedTokens), std::end(kReservedTokens), tok) !=
                          std::end(kReservedTokens);
    if (n >= min_count && !reserved) ranked.emplace_back(tok, n);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (auto& [tok, n] : ranked) v.add(tok);
  return v;
}

Vocab Vocab::build(std::span<const TokenizedAnnotation> corpus, std::size_t min_count) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(corpus.size());
  for (const auto& a : corpus) {
    auto& s = sentences.emplace_back();
    for (const auto& t : a.tokens) s.push_back(t.text);
  }
  return build(sentences, min_count);
}

int Vocab::id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("vocabulary id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::encode(std::span<const Token> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t.text));
  return out;
}

std::vector<int> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocab::decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

std::string Vocab::to_text() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocab Vocab::from_text(std::string_view text) {
  std::vector<std::string> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.emplace_back(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }
  if (lines.size() < std::size(kReservedTokens)) {
    throw FormatError("vocabulary file is missing the reserved tokens");
  }
  for (std::size_t i = 0; i < std::size(kReservedTokens); ++i) {
    if (lines[i] != kReservedTokens[i]) {
      throw FormatError("vocabulary line " + std::to_string(i + 1) + " must be " +
                        std::string(kReservedTokens[i]));
    }
  }
  Vocab v;
  for (std::size_t i = std::size(kReservedTokens); i < lines.size(); ++i) {
    if (lines[i].empty()) throw FormatError("empty vocabulary token on line " + std::to_string(i + 1));
    v.add(lines[i]);
  }
  return v;
}

Example encode_example(const TokenizedAnnotation& annotation, const Vocab& vocab) {
  if (annotation.polarity == Polarity::kConflict) {
    throw ContractError("conflict annotations have no class label");
  }
  return Example{vocab.encode(annotation.tokens), annotation.span, annotation.polarity};
}

std::vector<Example> encode_examples(std::span<const TokenizedAnnotation> annotations,
                                     const Vocab& vocab) {
  std::vector<Example> out;
  out.reserve(annotations.size());
  for (const auto& a : annotations) out.push_back(encode_example(a, vocab));
  return out;
}

}  // namespace dlcf
