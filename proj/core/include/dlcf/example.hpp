#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dlcf/lcf.hpp"

namespace dlcf {

// Sentiment labels. The first three are the classifier's class indices;
// kConflict only appears in raw annotations and is dropped before training.
enum class Polarity : int { kPositive = 0, kNegative = 1, kNeutral = 2, kConflict = 3 };

inline constexpr std::size_t kNumClasses = 3;

std::string_view to_string(Polarity p);
std::optional<Polarity> parse_polarity(std::string_view text);

// Reserved vocabulary ids.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;

// One classification instance: encoded sentence, aspect span, class label.
struct Example {
  std::vector<int> token_ids;
  AspectSpan span;
  Polarity label = Polarity::kNeutral;
};

// Right-padded batch. token_ids and pad_mask are batch_size x seq_len,
// row-major; pad_mask[b][t] == 1 for real tokens.
struct Batch {
  std::size_t batch_size = 0;
  std::size_t seq_len = 0;
  std::vector<int> token_ids;
  std::vector<std::uint8_t> pad_mask;
  std::vector<AspectSpan> spans;
  std::vector<int> labels;

  std::size_t length(std::size_t b) const;
  std::span<const int> tokens(std::size_t b) const;
  std::span<const std::uint8_t> mask(std::size_t b) const;
};

}  // namespace dlcf
