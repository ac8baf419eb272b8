#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlcf/example.hpp"
#include "dlcf/metrics.hpp"
#include "dlcf/model.hpp"
#include "dlcf/optimizer.hpp"

namespace dlcf {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  AdamConfig adam;
  std::uint64_t seed = 7;
  // Stop after this many epochs without a held-out macro-F1 improvement.
  std::optional<std::size_t> patience;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> holdout_macro_f1;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  // Epoch whose parameters the model holds on return: best held-out
  // macro-F1 (earliest on ties), or the last epoch without a held-out set.
  std::size_t best_epoch = 0;
  std::optional<double> best_macro_f1;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch Adam on mean cross-entropy. Batches are reshuffled every epoch
// from the seed; dropout draws from a generator seeded by it as well, so
// (model, data, config) fixes every reported number.
TrainResult train(DebertaLcfModel& model, std::span<const Example> train_set,
                  const TrainConfig& cfg, std::span<const Example> holdout = {},
                  const EpochCallback& on_epoch = {});

// Predicted class index per example, in input order (evaluation mode).
std::vector<int> predict_labels(const DebertaLcfModel& model, std::span<const Example> examples,
                                std::size_t batch_size = 32);

Metrics evaluate(const DebertaLcfModel& model, std::span<const Example> examples,
                 std::size_t batch_size = 32);

// Tab-separated history with a header row.
std::string format_history(std::span<const EpochRecord> history);

}  // namespace dlcf
