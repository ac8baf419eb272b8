#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "dlcf/example.hpp"
#include "dlcf/tensor.hpp"

namespace dlcf {

// counts[true][predicted]
using ConfusionMatrix = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Metrics {
  std::size_t total = 0;
  double accuracy = 0.0;
  std::array<ClassScores, kNumClasses> per_class{};
  double macro_f1 = 0.0;
  ConfusionMatrix confusion{};
};

ConfusionMatrix confusion_matrix(std::span<const int> gold, std::span<const int> predicted);

// Precision, recall and F1 are 0 whenever their denominator is 0.
// Throws ContractError on an empty matrix.
Metrics metrics_from_confusion(const ConfusionMatrix& confusion);
Metrics compute_metrics(std::span<const int> gold, std::span<const int> predicted);

// "key=value" lines: accuracy and macro_f1 first, then per-class scores and
// the confusion counts; scores printed with 4 decimals.
std::string format_metrics(const Metrics& m);

// Mean over rows of -log softmax(logits)[label], log-sum-exp stabilized.
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

}  // namespace dlcf
