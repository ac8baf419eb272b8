#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dlcf/attention.hpp"
#include "dlcf/batching.hpp"
#include "dlcf/metrics.hpp"
#include "dlcf/model.hpp"
#include "dlcf/optimizer.hpp"
#include "dlcf/tensor.hpp"

using namespace dlcf;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, bool grad = false) {
  Tensor t({r, c}, 0.0, grad);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : t.mutable_data()) v = u(rng);
  return t;
}

std::vector<Example> random_examples(std::size_t count, std::size_t len, int vocab) {
  std::mt19937_64 rng(1);
  std::vector<Example> xs(count);
  for (auto& e : xs) {
    for (std::size_t t = 0; t < len; ++t) e.token_ids.push_back(4 + static_cast<int>(rng() % (vocab - 4)));
    const std::size_t a = rng() % len;
    e.span = {a, a, 0, 0};
    e.label = static_cast<Polarity>(rng() % 3);
  }
  return xs;
}

ModelConfig bench_config(std::size_t d) {
  ModelConfig c;
  c.layers = 2;
  c.heads = 4;
  c.d_model = d;
  c.d_ff = 2 * d;
  c.vocab_size = 200;
  c.dropout = 0.1;
  return c;
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Tensor a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(16, 128);

static void BM_Mhsa(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 32, heads = 4, dh = d / heads;
  std::mt19937_64 rng(2);
  AttentionParams p;
  for (std::size_t h = 0; h < heads; ++h) {
    p.w_q.push_back(random_matrix(d, dh, rng));
    p.w_k.push_back(random_matrix(d, dh, rng));
    p.w_v.push_back(random_matrix(d, dh, rng));
    p.w_qr.push_back(random_matrix(d, dh, rng));
    p.w_kr.push_back(random_matrix(d, dh, rng));
  }
  p.w_o = random_matrix(d, d, rng);
  const RelPosTable rel{8, random_matrix(16, d, rng)};
  const Tensor hidden = random_matrix(n, d, rng);
  const std::vector<std::uint8_t> pad(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(mhsa(hidden, rel, p, pad));
}
BENCHMARK(BM_Mhsa)->Arg(16)->Arg(32)->Arg(64);

static void BM_ModelForward(benchmark::State& state) {
  const auto model = DebertaLcfModel::build(bench_config(static_cast<std::size_t>(state.range(0))));
  const auto xs = random_examples(16, 24, 200);
  const Batch batch = make_batches(xs, 16).front();
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(batch));
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_ModelForward)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& state) {
  auto model = DebertaLcfModel::build(bench_config(static_cast<std::size_t>(state.range(0))));
  const auto xs = random_examples(16, 24, 200);
  const Batch batch = make_batches(xs, 16).front();
  std::vector<Tensor> params = model.parameter_tensors();
  for (auto& t : params) t.set_requires_grad(true);
  Adam adam(params, AdamConfig{});
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    adam.zero_grad();
    Tape tape;
    Tensor loss;
    {
      Tape::Recording rec(tape);
      loss = cross_entropy(model.forward(batch, &rng), batch.labels);
    }
    tape.backward(loss);
    adam.step();
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_TrainStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
