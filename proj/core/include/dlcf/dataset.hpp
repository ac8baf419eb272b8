#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlcf/example.hpp"
#include "dlcf/tokenizer.hpp"

namespace dlcf {

// One aspect-term annotation as it appears in a source file. Offsets are
// 0-based code-point indices into `sentence`, end exclusive.
struct RawAnnotation {
  std::string sentence_id;
  std::string sentence;
  std::string term;
  Polarity polarity = Polarity::kNeutral;
  std::size_t char_from = 0;
  std::size_t char_to = 0;

  bool operator==(const RawAnnotation&) const = default;
};

enum class DatasetFormat { kSemeval, kTwitter };

std::string_view to_string(DatasetFormat f);
// "semeval" or "twitter"; throws ConfigError otherwise.
DatasetFormat parse_dataset_format(std::string_view text);

// SemEval-2014 task 4 XML: <sentence id> elements with a <text> child and
// <aspectTerm term polarity from to> children. Sentences without aspect
// terms contribute nothing. Throws ParseError (with line) on malformed
// markup and IntegrityError when sentence[from, to) != term.
std::vector<RawAnnotation> parse_semeval(std::string_view xml);
std::string serialize_semeval(std::span<const RawAnnotation> records);

// Three-line records: sentence containing "$T$", target, label in {-1, 0, 1}.
// Throws FormatError naming the 0-based record index.
std::vector<RawAnnotation> parse_twitter(std::string_view text);
std::string serialize_twitter(std::span<const RawAnnotation> records);

std::string read_text_file(const std::filesystem::path& path);
std::vector<RawAnnotation> load_dataset(const std::filesystem::path& path, DatasetFormat format);

struct LabelCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t neutral = 0;
  std::size_t conflict_dropped = 0;

  std::size_t total() const { return positive + negative + neutral; }
  LabelCounts& operator+=(const LabelCounts& o);
  bool operator==(const LabelCounts&) const = default;
};

// Three-class counts; conflict annotations are tallied separately and excluded.
LabelCounts dataset_stats(std::span<const RawAnnotation> records);

// A tokenized sentence with its aligned aspect and label.
struct TokenizedAnnotation {
  std::vector<Token> tokens;
  AspectSpan span;  // char_from/char_to keep the source code-point offsets
  Polarity polarity = Polarity::kNeutral;
};

TokenizedAnnotation tokenize_annotation(const RawAnnotation& record);

// Tokenizes every non-conflict record.
std::vector<TokenizedAnnotation> tokenize_dataset(std::span<const RawAnnotation> records);

}  // namespace dlcf
