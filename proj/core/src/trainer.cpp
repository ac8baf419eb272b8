#include "dlcf/trainer.hpp"

#include <random>
#include <sstream>

#include "dlcf/batching.hpp"
#include "dlcf/errors.hpp"
#include "dlcf/key_value.hpp"

namespace dlcf {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (patience && *patience < 1) throw ConfigError("patience must be >= 1 when set");
  adam.validate();
}

namespace {

std::vector<std::vector<double>> snapshot(const DebertaLcfModel& model) {
  std::vector<std::vector<double>> out;
  for (const auto& p : model.parameters()) out.emplace_back(p.value.data().begin(), p.value.data().end());
  return out;
}

void restore(DebertaLcfModel& model, const std::vector<std::vector<double>>& values) {
  auto params = model.parameter_tensors();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto dst = params[i].mutable_data();
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

}  // namespace

TrainResult train(DebertaLcfModel& model, std::span<const Example> train_set,
                  const TrainConfig& cfg, std::span<const Example> holdout,
                  const EpochCallback& on_epoch) {
  if (train_set.empty()) throw ContractError("train: empty training set");
  cfg.validate();

  auto params = model.parameter_tensors();
  for (auto& p : params) p.set_requires_grad(true);
  Adam optimizer(params, cfg.adam);
  std::mt19937_64 dropout_rng(cfg.seed);

  TrainResult result;
  std::vector<std::vector<double>> best;
  std::size_t since_improvement = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto batches = make_batches(train_set, cfg.batch_size, cfg.seed * 1000003ULL + epoch);
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      optimizer.zero_grad();
      Tape tape;
      Tensor loss;
      {
        Tape::Recording recording(tape);
        loss = cross_entropy(model.forward(batch, &dropout_rng), batch.labels);
      }
      loss_sum += loss.item() * static_cast<double>(batch.batch_size);
      tape.backward(loss);
      optimizer.step();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / static_cast<double>(train_set.size());
    rec.train_accuracy = evaluate(model, train_set).accuracy;
    if (!holdout.empty()) rec.holdout_macro_f1 = evaluate(model, holdout).macro_f1;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.holdout_macro_f1) {
      if (!result.best_macro_f1 || *rec.holdout_macro_f1 > *result.best_macro_f1) {
        result.best_macro_f1 = rec.holdout_macro_f1;
        result.best_epoch = epoch;
        best = snapshot(model);
        since_improvement = 0;
      } else if (cfg.patience && ++since_improvement >= *cfg.patience) {
        break;
      }
    } else {
      result.best_epoch = epoch;
    }
  }
  if (!best.empty()) restore(model, best);
  return result;
}

std::vector<int> predict_labels(const DebertaLcfModel& model, std::span<const Example> examples,
                                std::size_t batch_size) {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& batch : make_batches(examples, batch_size)) {
    const Tensor logits = model.forward(batch);
    for (std::size_t b = 0; b < batch.batch_size; ++b) {
      const auto row = logits.data().subspan(b * kNumClasses, kNumClasses);
      out.push_back(static_cast<int>(prediction_from_logits(row).label));
    }
  }
  return out;
}

Metrics evaluate(const DebertaLcfModel& model, std::span<const Example> examples,
                 std::size_t batch_size) {
  if (examples.empty()) throw ContractError("evaluate: empty dataset");
  std::vector<int> gold;
  gold.reserve(examples.size());
  for (const auto& e : examples) gold.push_back(static_cast<int>(e.label));
  return compute_metrics(gold, predict_labels(model, examples, batch_size));
}

std::string format_history(std::span<const EpochRecord> history) {
  std::ostringstream os;
  os << "epoch\tloss\ttrain_accuracy\tholdout_macro_f1\n";
  for (const auto& r : history) {
    os << r.epoch << '\t' << format_double(r.mean_loss) << '\t' << format_double(r.train_accuracy)
       << '\t' << (r.holdout_macro_f1 ? format_double(*r.holdout_macro_f1) : std::string("nan"))
       << '\n';
  }
  return os.str();
}

}  // namespace dlcf
