#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "dlcf/batching.hpp"
#include "dlcf/checkpoint.hpp"
#include "dlcf/errors.hpp"
#include "dlcf/grad_check.hpp"
#include "dlcf/key_value.hpp"
#include "dlcf/metrics.hpp"
#include "dlcf/optimizer.hpp"
#include "dlcf/trainer.hpp"
#include "oracles.hpp"

using namespace dlcf;
using dlcf::testing::brute_metrics;
using dlcf::testing::BruteMetrics;

namespace {

ModelConfig tiny_config(std::size_t vocab = 12) {
  ModelConfig c;
  c.layers = 1;
  c.heads = 2;
  c.d_model = 8;
  c.d_ff = 16;
  c.max_relative_distance = 4;
  c.vocab_size = vocab;
  c.dropout = 0.1;
  c.seed = 3;
  return c;
}

std::vector<Example> toy_set(std::size_t n, std::uint64_t seed, int vocab = 12) {
  std::mt19937_64 rng(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    const std::size_t len = 3 + rng() % 6;
    for (std::size_t t = 0; t < len; ++t) e.token_ids.push_back(4 + static_cast<int>(rng() % (vocab - 4)));
    const std::size_t a = rng() % len;
    e.span = {a, a, 0, 0};
    e.label = static_cast<Polarity>(rng() % 3);
    out.push_back(e);
  }
  return out;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("dlcf_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + name);
}

}  // namespace

// ---- metrics -------------------------------------------------------------

TEST(Metrics, PerfectPredictions) {
  const std::vector<int> y{0, 1, 2, 2, 1};
  const Metrics m = compute_metrics(y, y);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.macro_f1, 1.0);
}

TEST(Metrics, ConfusionMatrixWithEmptyClass) {
  ConfusionMatrix cm{};
  cm[0] = {5, 0, 0};
  cm[1] = {2, 3, 0};
  const Metrics m = metrics_from_confusion(cm);
  EXPECT_DOUBLE_EQ(m.per_class[0].f1, 10.0 / 12.0);
  EXPECT_DOUBLE_EQ(m.per_class[1].f1, 6.0 / 8.0);
  EXPECT_EQ(m.per_class[2].f1, 0.0);
  EXPECT_EQ(m.per_class[2].precision, 0.0);
  EXPECT_EQ(m.per_class[2].recall, 0.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, (10.0 / 12.0 + 6.0 / 8.0) / 3.0);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.8);
}

TEST(Metrics, SingleClassPredictorOnBalancedSet) {
  const std::vector<int> gold{0, 1, 2, 0, 1, 2};
  const std::vector<int> pred(6, 1);
  EXPECT_DOUBLE_EQ(compute_metrics(gold, pred).accuracy, 1.0 / 3.0);
}

TEST(Metrics, MatchBruteForceOnRandomVectors) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 1000;
    std::vector<int> gold(n), pred(n);
    const int skew = static_cast<int>(rng() % 4);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = static_cast<int>(rng() % 3);
      pred[i] = skew == 3 ? gold[i] : static_cast<int>(rng() % (1 + static_cast<unsigned>(skew)));
    }
    const Metrics m = compute_metrics(gold, pred);
    const BruteMetrics b = brute_metrics(gold, pred);
    EXPECT_EQ(m.accuracy, b.accuracy);
    EXPECT_EQ(m.macro_f1, b.macro_f1);
    EXPECT_GE(m.macro_f1, 0.0);
    EXPECT_LE(m.macro_f1, 1.0);
  }
}

TEST(Metrics, ErrorsAndFormatting) {
  EXPECT_THROW(compute_metrics({}, {}), ContractError);
  EXPECT_THROW(compute_metrics(std::vector<int>{0}, std::vector<int>{3}), ContractError);
  const std::vector<int> gold{0, 1, 2, 0}, pred{0, 1, 1, 2};
  const std::string text = format_metrics(compute_metrics(gold, pred));
  EXPECT_EQ(text.substr(0, 32), "accuracy=0.5000\nmacro_f1=0.4444\n");
  std::size_t lines = 0;
  for (const auto& kv : parse_key_values(text)) {
    ++lines;
    EXPECT_FALSE(kv.value.empty()) << kv.key;
  }
  EXPECT_EQ(lines, 3u + 9u + 9u);
}

// ---- loss ----------------------------------------------------------------

TEST(CrossEntropy, UniformLogitsGiveLogThree) {
  for (double c : {0.0, -3.5, 120.0}) {
    const Tensor logits = Tensor::matrix({{c, c, c}, {c, c, c}});
    const std::vector<int> labels{0, 2};
    EXPECT_NEAR(cross_entropy(logits, labels).item(), std::log(3.0), 1e-12);
  }
}

TEST(CrossEntropy, LimitAndBatchMean) {
  const std::vector<int> zero{0};
  EXPECT_LT(cross_entropy(Tensor::matrix({{50.0, 0.0, 0.0}}), zero).item(), 1e-20);
  const double l1 = -std::log(std::exp(1.0) / (std::exp(1.0) + std::exp(2.0) + std::exp(0.5)));
  const double l2 = -std::log(std::exp(-1.0) / (std::exp(0.0) + std::exp(0.0) + std::exp(-1.0)));
  const std::vector<int> labels{0, 2};
  EXPECT_NEAR(cross_entropy(Tensor::matrix({{1.0, 2.0, 0.5}, {0.0, 0.0, -1.0}}), labels).item(),
              (l1 + l2) / 2.0, 1e-14);
}

TEST(CrossEntropy, NonNegativeGradientAndLabelRange) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4, 4);
  Tensor logits({4, 3}, 0.0, true);
  for (auto& v : logits.mutable_data()) v = u(rng);
  const std::vector<int> labels{2, 0, 1, 1};
  EXPECT_GE(cross_entropy(logits, labels).item(), 0.0);
  std::vector<Tensor> params{logits};
  EXPECT_LT(grad_check([&] { return cross_entropy(logits, labels); }, params).max_relative_error,
            1e-6);
  const std::vector<int> bad{0, 1, 3, 0};
  EXPECT_THROW(cross_entropy(logits, bad), ContractError);
}

// ---- optimizer -----------------------------------------------------------

TEST(AdamTest, ZeroGradientGivesZeroUpdate) {
  std::vector<double> p{0.5, -2.0};
  const std::vector<double> g{0.0, 0.0};
  AdamState s;
  adam_step(p, g, s, 1, {});
  EXPECT_EQ(p, (std::vector<double>{0.5, -2.0}));
}

TEST(AdamTest, FirstStepIsLearningRateTimesSign) {
  for (double g : {3.0, -0.02, 1e-3}) {
    std::vector<double> p{1.0};
    const std::vector<double> grad{g};
    AdamState s;
    AdamConfig cfg;
    cfg.learning_rate = 0.01;
    adam_step(p, grad, s, 1, cfg);
    EXPECT_NEAR(p[0] - 1.0, -0.01 * (g > 0 ? 1.0 : -1.0), 2 * 0.01 * 1e-8 / std::abs(g) + 1e-15);
  }
}

TEST(AdamTest, ThreeStepsOnQuadraticMatchReference) {
  // f(x) = sum (x - c)^2, gradient 2(x - c).
  const std::vector<double> c{1.0, -0.5, 3.0};
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.01;
  std::vector<double> x{0.0, 0.0, 0.0}, ref = x, m(3, 0.0), v(3, 0.0);
  AdamState s;
  for (std::size_t t = 1; t <= 3; ++t) {
    std::vector<double> g(3);
    for (std::size_t i = 0; i < 3; ++i) g[i] = 2.0 * (x[i] - c[i]);
    adam_step(x, g, s, t, cfg);
    for (std::size_t i = 0; i < 3; ++i) {
      const double gi = 2.0 * (ref[i] - c[i]);
      m[i] = 0.9 * m[i] + 0.1 * gi;
      v[i] = 0.999 * v[i] + 0.001 * gi * gi;
      const double mh = m[i] / (1.0 - std::pow(0.9, static_cast<double>(t)));
      const double vh = v[i] / (1.0 - std::pow(0.999, static_cast<double>(t)));
      ref[i] -= 0.1 * 0.01 * ref[i];
      ref[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(x[i], ref[i], 1e-15);
}

TEST(AdamTest, ConfigValidation) {
  AdamConfig cfg;
  cfg.beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  std::vector<double> p{1.0};
  AdamState s;
  EXPECT_THROW(adam_step(p, p, s, 0, {}), ContractError);
}

// ---- training ------------------------------------------------------------

TEST(Training, SameSeedGivesIdenticalHistories) {
  const auto data = toy_set(24, 1);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 5;
  auto run = [&] {
    auto m = DebertaLcfModel::build(tiny_config());
    const auto result = train(m, data, cfg, std::span<const Example>(data).first(6));
    return std::pair{format_history(result.history), m.forward(make_batches(data, 24)[0])};
  };
  const auto [h1, l1] = run();
  const auto [h2, l2] = run();
  EXPECT_EQ(h1, h2);
  for (std::size_t i = 0; i < l1.size(); ++i) EXPECT_EQ(l1.data()[i], l2.data()[i]);
}

TEST(Training, ZeroLearningRateLeavesParametersAndLossFlat) {
  auto c = tiny_config();
  c.dropout = 0.0;
  auto m = DebertaLcfModel::build(c);
  const auto before = m.parameters();
  std::vector<std::vector<double>> snapshot;
  for (const auto& p : before) snapshot.emplace_back(p.value.data().begin(), p.value.data().end());
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.adam.learning_rate = 0.0;
  const auto result = train(m, toy_set(10, 2), cfg);
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    const auto now = m.parameters()[i].value.data();
    EXPECT_TRUE(std::equal(now.begin(), now.end(), snapshot[i].begin())) << m.parameters()[i].name;
  }
  for (const auto& r : result.history)
    EXPECT_NEAR(r.mean_loss, result.history.front().mean_loss, 1e-12);
}

TEST(Training, HistoryFormatAndBestEpochRestore) {
  auto m = DebertaLcfModel::build(tiny_config());
  const auto data = toy_set(20, 3);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 8;
  std::vector<std::size_t> seen;
  const auto holdout = std::span<const Example>(data).first(5);
  const auto result = train(m, data, cfg, holdout, [&](const EpochRecord& r) { seen.push_back(r.epoch); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3, 4}));
  ASSERT_TRUE(result.best_macro_f1.has_value());
  EXPECT_EQ(*result.best_macro_f1, *result.history[result.best_epoch - 1].holdout_macro_f1);
  EXPECT_EQ(evaluate(m, holdout).macro_f1, *result.best_macro_f1);
  for (const auto& r : result.history) EXPECT_LE(*r.holdout_macro_f1, *result.best_macro_f1);

  const std::string text = format_history(result.history);
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch\tloss\ttrain_accuracy\tholdout_macro_f1");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EpochRecord no_holdout{1, 0.5, 0.25, std::nullopt};
  EXPECT_EQ(format_history(std::span(&no_holdout, 1)),
            "epoch\tloss\ttrain_accuracy\tholdout_macro_f1\n1\t0.5\t0.25\tnan\n");
}

TEST(Training, EmptyInputsAreContractErrors) {
  auto m = DebertaLcfModel::build(tiny_config());
  EXPECT_THROW(train(m, {}, TrainConfig{}), ContractError);
  EXPECT_THROW(evaluate(m, {}), ContractError);
  TrainConfig bad;
  bad.epochs = 0;
  const auto data = toy_set(2, 4);
  EXPECT_THROW(train(m, data, bad), ConfigError);
}

TEST(Evaluate, InvariantUnderPermutation) {
  const auto m = DebertaLcfModel::build(tiny_config());
  auto data = toy_set(40, 5);
  const Metrics a = evaluate(m, data, 7);
  std::mt19937_64 rng(6);
  std::shuffle(data.begin(), data.end(), rng);
  const Metrics b = evaluate(m, data, 3);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.macro_f1, b.macro_f1);
  EXPECT_EQ(a.confusion, b.confusion);
}

// ---- checkpoints ---------------------------------------------------------

TEST(Checkpoint, RoundTripIsBitwise) {
  auto m = DebertaLcfModel::build(tiny_config());
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto data = toy_set(12, 7);
  train(m, data, cfg);
  const Vocab vocab = Vocab::build(std::vector<std::vector<std::string>>{
      {"a", "b", "c", "d", "e", "f", "g", "h"}});
  const auto path = temp_path("roundtrip.ckpt");
  save_checkpoint(m, vocab, path);
  const Checkpoint ckpt = read_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(ckpt.version, kCheckpointVersion);
  EXPECT_EQ(ckpt.config, m.config());
  EXPECT_EQ(ckpt.vocab, vocab);
  const auto restored = restore_model(ckpt);
  const Batch batch = make_batches(data, 12)[0];
  const Tensor a = m.forward(batch), b = restored.forward(batch);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
}

TEST(Checkpoint, LayoutHeader) {
  const auto m = DebertaLcfModel::build(tiny_config());
  const std::string bytes = encode_checkpoint(m, Vocab::build(std::vector<std::vector<std::string>>{
                                                     {"a", "b", "c", "d", "e", "f", "g", "h"}}));
  EXPECT_EQ(bytes.substr(0, 4), "LCFD");
  EXPECT_EQ(bytes.substr(4, 4), std::string("\x01\x00\x00\x00", 4));
  const std::uint32_t config_len = static_cast<unsigned char>(bytes[8]) |
                                   static_cast<unsigned char>(bytes[9]) << 8 |
                                   static_cast<unsigned char>(bytes[10]) << 16 |
                                   static_cast<unsigned char>(bytes[11]) << 24;
  EXPECT_EQ(bytes.substr(12, config_len), m.config().to_text());
}

TEST(Checkpoint, CorruptInputsAreLoadErrors) {
  const auto m = DebertaLcfModel::build(tiny_config());
  const Vocab vocab = Vocab::build(std::vector<std::vector<std::string>>{
      {"a", "b", "c", "d", "e", "f", "g", "h"}});
  const std::string bytes = encode_checkpoint(m, vocab);
  EXPECT_NO_THROW(decode_checkpoint(bytes));
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() / 2,
                          bytes.size() - 1}) {
    EXPECT_THROW(decode_checkpoint(std::string_view(bytes).substr(0, cut)), LoadError) << cut;
  }
  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(wrong_magic), LoadError);
  std::string wrong_version = bytes;
  wrong_version[4] = 2;
  try {
    decode_checkpoint(wrong_version);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  EXPECT_THROW(decode_checkpoint(bytes + "x"), LoadError);
  const std::string small_vocab = encode_checkpoint(m, Vocab{});
  EXPECT_THROW(decode_checkpoint(small_vocab), LoadError);
}

TEST(Checkpoint, ConfigMismatchIsShapeError) {
  const auto a = DebertaLcfModel::build(tiny_config());
  auto other_cfg = tiny_config();
  other_cfg.d_ff = 24;
  auto b = DebertaLcfModel::build(other_cfg);
  const Vocab vocab = Vocab::build(std::vector<std::vector<std::string>>{
      {"a", "b", "c", "d", "e", "f", "g", "h"}});
  const Checkpoint ckpt = decode_checkpoint(encode_checkpoint(a, vocab));
  try {
    load_parameters(b, ckpt);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos);
  }
}

TEST(Checkpoint, MissingFile) {
  EXPECT_THROW(read_checkpoint(temp_path("does-not-exist.ckpt")), Error);
}

// ---- key/value text ------------------------------------------------------

TEST(KeyValueText, ParsesCommentsAndRejectsJunk) {
  const auto kvs = parse_key_values("# header\n\na = 1\n  b=two words # trailing\nc =\t3.5\n");
  ASSERT_EQ(kvs.size(), 3u);
  EXPECT_EQ(kvs[1].key, "b");
  EXPECT_EQ(kvs[1].value, "two words");
  EXPECT_EQ(kvs[1].line, 4u);
  EXPECT_EQ(parse_double(kvs[2]), 3.5);
  EXPECT_EQ(parse_size(kvs[0]), 1u);
  EXPECT_THROW(parse_size(kvs[1]), ConfigError);
  EXPECT_THROW(parse_key_values("just text\n"), ConfigError);
  EXPECT_THROW(parse_key_values("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(parse_size(KeyValue{"n", "-3", 1}), ConfigError);
  EXPECT_TRUE(parse_bool(KeyValue{"p", "true", 1}));
  EXPECT_FALSE(parse_bool(KeyValue{"p", "false", 1}));
  EXPECT_THROW(parse_bool(KeyValue{"p", "yes please", 1}), ConfigError);
}

TEST(KeyValueText, NumberFormatting) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-3), "0.001");
  EXPECT_EQ(std::stod(format_double(std::numbers::pi)), std::numbers::pi);
  EXPECT_EQ(format_fixed(1.0 / 3.0, 4), "0.3333");
  EXPECT_EQ(format_fixed(1.0, 4), "1.0000");
}
