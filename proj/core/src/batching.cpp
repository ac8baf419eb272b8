#include "dlcf/batching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dlcf/errors.hpp"

namespace dlcf {

std::size_t Batch::length(std::size_t b) const {
  const auto m = mask(b);
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

std::span<const int> Batch::tokens(std::size_t b) const {
  return std::span<const int>(token_ids).subspan(b * seq_len, seq_len);
}

std::span<const std::uint8_t> Batch::mask(std::size_t b) const {
  return std::span<const std::uint8_t>(pad_mask).subspan(b * seq_len, seq_len);
}

Batch make_batch(std::span<const Example* const> examples) {
  if (examples.empty()) throw ContractError("make_batch: no examples");
  Batch batch;
  batch.batch_size = examples.size();
  for (const auto* e : examples) batch.seq_len = std::max(batch.seq_len, e->token_ids.size());
  batch.token_ids.assign(batch.batch_size * batch.seq_len, kPadId);
  batch.pad_mask.assign(batch.batch_size * batch.seq_len, 0);
  for (std::size_t b = 0; b < examples.size(); ++b) {
    const auto& ids = examples[b]->token_ids;
    std::copy(ids.begin(), ids.end(), batch.token_ids.begin() + static_cast<std::ptrdiff_t>(b * batch.seq_len));
    std::fill_n(batch.pad_mask.begin() + static_cast<std::ptrdiff_t>(b * batch.seq_len), ids.size(), 1);
    batch.spans.push_back(examples[b]->span);
    batch.labels.push_back(static_cast<int>(examples[b]->label));
  }
  return batch;
}

std::vector<Batch> make_batches(std::span<const Example> examples, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed) {
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  std::vector<const Example*> order;
  order.reserve(examples.size());
  for (const auto& e : examples) order.push_back(&e);
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Batch> out;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - i);
    out.push_back(make_batch(std::span<const Example* const>(order).subspan(i, n)));
  }
  return out;
}

std::pair<std::vector<Example>, std::vector<Example>> split_holdout(
    std::span<const Example> examples, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ContractError("holdout fraction must be in [0, 1)");
  std::vector<std::size_t> idx(examples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::size_t held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(examples.size())));
  if (fraction > 0.0 && held == 0 && examples.size() > 1) held = 1;
  held = std::min(held, examples.size() > 0 ? examples.size() - 1 : 0);
  std::vector<Example> train, holdout;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < held ? holdout : train).push_back(examples[idx[i]]);
  }
  return {std::move(train), std::move(holdout)};
}

}  // namespace dlcf
