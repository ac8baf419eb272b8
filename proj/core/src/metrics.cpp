#include "dlcf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "dlcf/errors.hpp"
#include "dlcf/key_value.hpp"

namespace dlcf {

ConfusionMatrix confusion_matrix(std::span<const int> gold, std::span<const int> predicted) {
  if (gold.size() != predicted.size()) {
    throw DimensionError("confusion_matrix: " + std::to_string(gold.size()) + " labels vs " +
                         std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm{};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i], p = predicted[i];
    if (g < 0 || g >= static_cast<int>(kNumClasses) || p < 0 || p >= static_cast<int>(kNumClasses)) {
      throw ContractError("confusion_matrix: class index out of range at position " +
                          std::to_string(i));
    }
    ++cm[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
  }
  return cm;
}

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
  Metrics m;
  m.confusion = cm;
  std::size_t correct = 0;
  for (std::size_t t = 0; t < kNumClasses; ++t)
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      m.total += cm[t][p];
      if (t == p) correct += cm[t][p];
    }
  if (m.total == 0) throw ContractError("metrics over an empty dataset");
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);

  double f1_sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t predicted = 0, actual = 0;
    for (std::size_t o = 0; o < kNumClasses; ++o) {
      predicted += cm[o][c];
      actual += cm[c][o];
    }
    const double tp = static_cast<double>(cm[c][c]);
    auto& s = m.per_class[c];
    s.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    s.recall = actual ? tp / static_cast<double>(actual) : 0.0;
    const double pr = s.precision + s.recall;
    s.f1 = pr > 0.0 ? 2.0 * s.precision * s.recall / pr : 0.0;
    f1_sum += s.f1;
  }
  m.macro_f1 = f1_sum / static_cast<double>(kNumClasses);
  return m;
}

Metrics compute_metrics(std::span<const int> gold, std::span<const int> predicted) {
  return metrics_from_confusion(confusion_matrix(gold, predicted));
}

std::string format_metrics(const Metrics& m) {
  std::ostringstream os;
  os << "accuracy=" << format_fixed(m.accuracy, 4) << '\n'
     << "macro_f1=" << format_fixed(m.macro_f1, 4) << '\n'
     << "total=" << m.total << '\n';
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto name = to_string(static_cast<Polarity>(c));
    const auto& s = m.per_class[c];
    os << name << ".precision=" << format_fixed(s.precision, 4) << '\n'
       << name << ".recall=" << format_fixed(s.recall, 4) << '\n'
       << name << ".f1=" << format_fixed(s.f1, 4) << '\n';
  }
  for (std::size_t t = 0; t < kNumClasses; ++t)
    for (std::size_t p = 0; p < kNumClasses; ++p)
      os << "confusion." << to_string(static_cast<Polarity>(t)) << '.'
         << to_string(static_cast<Polarity>(p)) << '=' << m.confusion[t][p] << '\n';
  return os.str();
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  const std::size_t rows = logits.rows(), cols = logits.cols();
  if (labels.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                         shape_string(logits.shape()));
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= cols) {
      throw ContractError("cross_entropy: label " + std::to_string(labels[i]) + " at row " +
                          std::to_string(i) + " outside [0, " + std::to_string(cols) + ")");
    }
  }
  auto X = logits.data();
  std::vector<double> probs(rows * cols);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = &X[i * cols];
    const double mx = *std::max_element(row, row + cols);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    total += lse - row[labels[i]];
    for (std::size_t j = 0; j < cols; ++j) probs[i * cols + j] = std::exp(row[j] - lse);
  }
  Tensor loss = Tensor::scalar(total / static_cast<double>(rows));
  if (Tape::should_record({&logits})) {
    Tape::active()->record(loss, [logits, loss, probs = std::move(probs),
                                  labels = std::vector<int>(labels.begin(), labels.end()), rows,
                                  cols]() mutable {
      const double g = loss.grad()[0] / static_cast<double>(rows);
      auto GX = logits.mutable_grad();
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
          const double onehot = static_cast<int>(j) == labels[i] ? 1.0 : 0.0;
          GX[i * cols + j] += g * (probs[i * cols + j] - onehot);
        }
    });
  }
  return loss;
}

}  // namespace dlcf
