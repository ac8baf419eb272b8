#include "dlcf/lcf.hpp"

#include <gtest/gtest.h>

#include "dlcf/errors.hpp"
#include "dlcf/grad_check.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace dlcf;
using namespace dlcf::testing;

namespace {

AspectSpan span_of(std::size_t a, std::size_t b) { return {a, b, 0, 0}; }

AspectSpan random_span(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t a = pick(rng), b = pick(rng);
  if (a > b) std::swap(a, b);
  return span_of(a, b);
}

FusionParams random_fusion(std::size_t d, std::mt19937_64& rng) {
  return {random_tensor({2 * d, d}, rng, -0.5, 0.5), random_tensor({d}, rng, -0.5, 0.5),
          random_encoder(d, 2, 2 * d, rng)};
}

}  // namespace

TEST(Srd, Examples) {
  EXPECT_EQ(compute_srd(5, span_of(2, 2)).values, (std::vector<int>{2, 1, 0, 1, 2}));
  EXPECT_EQ(compute_srd(4, span_of(0, 3)).values, (std::vector<int>{0, 0, 0, 0}));
  EXPECT_EQ(compute_srd(8, span_of(3, 4)).values, (std::vector<int>{3, 2, 1, 0, 0, 1, 2, 3}));
}

TEST(Srd, SpanOutOfRangeIsContractError) {
  EXPECT_THROW(compute_srd(3, span_of(1, 3)), ContractError);
  EXPECT_THROW(compute_srd(3, span_of(2, 1)), ContractError);
}

TEST(Srd, SymmetricAroundSingleToken) {
  for (std::size_t c = 0; c < 10; ++c) {
    const auto srd = compute_srd(21, span_of(c + 5, c + 5));
    for (std::size_t t = 0; t <= 5; ++t) EXPECT_EQ(srd.values[c + 5 - t], srd.values[c + 5 + t]);
  }
}

TEST(Srd, MatchesBruteForceAndProfileInvariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 16;
    const AspectSpan s = random_span(n, rng);
    const auto srd = compute_srd(n, s);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(srd.values[i], brute_srd(i, s));
      EXPECT_EQ(srd.values[i] == 0, i >= s.token_start && i <= s.token_end);
      if (i > s.token_end) EXPECT_EQ(srd.values[i], srd.values[i - 1] + 1);
      if (i < s.token_start) EXPECT_EQ(srd.values[i], srd.values[i + 1] + 1);
    }
  }
}

TEST(Cdm, Examples) {
  const auto srd = compute_srd(5, span_of(2, 2));
  Tensor all = cdm_mask(srd, 2, 3);
  for (double v : all.data()) EXPECT_EQ(v, 1.0);
  Tensor m = cdm_mask(srd, 1, 3);
  const std::vector<double> pattern{0, 1, 1, 1, 0};
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m.at(i, j), pattern[i]);
}

TEST(Cdm, MatchesBruteForceAndIsMonotoneInAlpha) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 16, d = 1 + rng() % 4;
    const auto srd = compute_srd(n, random_span(n, rng));
    for (int alpha = 0; alpha <= 8; ++alpha) {
      const Tensor m = cdm_mask(srd, alpha, d), next = cdm_mask(srd, alpha + 1, d);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          EXPECT_EQ(m.at(i, j), srd.values[i] <= alpha ? 1.0 : 0.0);
          EXPECT_LE(m.at(i, j), next.at(i, j));
        }
    }
  }
}

TEST(Cdw, Examples) {
  SrdProfile srd{{0, 1, 2}};
  const Tensor local = cdw_weights(srd, 2, 3);
  for (double v : local.data()) EXPECT_EQ(v, 1.0);
  SrdProfile far{{0, 1, 2, 3, 4, 5, 6, 7, 8, 12}};
  Tensor w = cdw_weights(far, 2, 10);
  EXPECT_DOUBLE_EQ(w.at(5, 0), 0.7);
  EXPECT_EQ(w.at(9, 0), 0.0);  // srd = alpha + n
  EXPECT_THROW(cdw_weights(far, 2, 9), ContractError);
}

TEST(Cdw, MatchesBruteForceBoundedAndDecreasing) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 16;
    const auto srd = compute_srd(n, random_span(n, rng));
    for (int alpha = 0; alpha <= 8; ++alpha) {
      const Tensor w = cdw_weights(srd, alpha, n);
      for (std::size_t i = 0; i < n; ++i) {
        const double nn = static_cast<double>(n);
        const double expected =
            srd.values[i] <= alpha ? 1.0 : std::max(0.0, (nn - (srd.values[i] - alpha)) / nn);
        EXPECT_EQ(w.at(i, 0), expected);
        EXPECT_GE(w.at(i, 0), 0.0);
        EXPECT_LE(w.at(i, 0), 1.0);
        for (std::size_t j = 0; j < n; ++j)
          if (srd.values[j] >= srd.values[i]) EXPECT_LE(w.at(j, 0), w.at(i, 0));
      }
    }
  }
}

TEST(ApplyLcf, CdmWithLargeAlphaIsIdentity) {
  std::mt19937_64 rng(14);
  Tensor x = random_tensor({7, 4}, rng);
  const auto srd = compute_srd(7, span_of(1, 2));
  Tensor y = apply_lcf(x, {srd.max(), LcfMode::kCdm}, srd);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(ApplyLcf, MaskedRowsAreExactZeroAndIgnoreTheirInputs) {
  std::mt19937_64 rng(15);
  const auto srd = compute_srd(9, span_of(4, 4));
  const LcfConfig cfg{2, LcfMode::kCdm};
  Tensor x = random_tensor({9, 3}, rng);
  Tensor y = apply_lcf(x, cfg, srd);
  Tensor x2 = x.clone();
  for (std::size_t i = 0; i < 9; ++i)
    if (srd.values[i] > 2)
      for (std::size_t j = 0; j < 3; ++j) x2.at(i, j) = 1e6 * (1.0 + static_cast<double>(j));
  Tensor y2 = apply_lcf(x2, cfg, srd);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (srd.values[i] > 2) EXPECT_EQ(y.at(i, j), 0.0);
      EXPECT_EQ(y.at(i, j), y2.at(i, j));
    }
}

TEST(ApplyLcf, CdmAndCdwAgreeOnLocalRows) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 16;
    const auto srd = compute_srd(n, random_span(n, rng));
    const int alpha = static_cast<int>(rng() % 9);
    Tensor x = random_tensor({n, 3}, rng);
    Tensor a = apply_lcf(x, {alpha, LcfMode::kCdm}, srd);
    Tensor b = apply_lcf(x, {alpha, LcfMode::kCdw}, srd);
    for (std::size_t i = 0; i < n; ++i) {
      if (srd.values[i] > alpha) continue;
      for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_EQ(a.at(i, j), x.at(i, j));
        EXPECT_EQ(b.at(i, j), x.at(i, j));
      }
    }
  }
}

TEST(ApplyLcf, CdwEqualsRowScaledLoop) {
  std::mt19937_64 rng(17);
  const std::size_t n = 12;
  const auto srd = compute_srd(n, span_of(2, 3));
  Tensor x = random_tensor({n, 5}, rng);
  Tensor y = apply_lcf(x, {1, LcfMode::kCdw}, srd);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = srd.values[i] <= 1 ? 1.0 : std::max(0.0, (12.0 - (srd.values[i] - 1)) / 12.0);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(y.at(i, j), x.at(i, j) * w);
  }
}

TEST(ApplyLcf, GradientFlowsOnlyThroughSurvivors) {
  std::mt19937_64 rng(18);
  const auto srd = compute_srd(6, span_of(0, 0));
  Tensor x = random_tensor({6, 2}, rng);
  Tape tape;
  {
    Tape::Recording rec(tape);
    tape.backward(sum(apply_lcf(x, {2, LcfMode::kCdm}, srd)));
  }
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      EXPECT_EQ(x.grad()[i * 2 + j], srd.values[i] <= 2 ? 1.0 : 0.0);
}

TEST(ApplyLcf, OffsetProfileLeavesSpecialRowsLocal) {
  const auto srd = compute_srd(4, span_of(0, 0));  // 0 1 2 3
  Tensor w = lcf_row_weights({1, LcfMode::kCdm}, srd, 7, 1);
  EXPECT_EQ(std::vector<double>(w.data().begin(), w.data().end()),
            (std::vector<double>{1, 1, 1, 0, 0, 1, 1}));
  Tensor x({7, 2}, 2.0);
  Tensor y = apply_lcf_at(x, {5, LcfMode::kOff}, srd, 1);
  EXPECT_TRUE(y.same_storage(x));
  EXPECT_THROW(lcf_row_weights({1, LcfMode::kCdm}, srd, 4, 1), DimensionError);
}

TEST(LcfMode, ParsesAndPrints) {
  for (LcfMode m : {LcfMode::kCdm, LcfMode::kCdw, LcfMode::kOff})
    EXPECT_EQ(parse_lcf_mode(to_string(m)), m);
  EXPECT_EQ(parse_lcf_mode("CDW"), LcfMode::kCdw);
  EXPECT_THROW(parse_lcf_mode("both"), ConfigError);
}

TEST(Fusion, ShapeDeterminismAndMismatch) {
  std::mt19937_64 rng(19);
  const FusionParams fusion = random_fusion(4, rng);
  const RelPosTable rel = random_rel(3, 4, rng);
  Tensor local = random_tensor({5, 4}, rng), global = random_tensor({5, 4}, rng);
  const std::vector<std::uint8_t> pad(5, 1);
  std::mt19937_64 g1(8), g2(8);
  Tensor a = fuse_local_global(local, global, fusion, rel, pad, {0.3, &g1});
  Tensor b = fuse_local_global(local, global, fusion, rel, pad, {0.3, &g2});
  EXPECT_EQ(a.shape(), (Shape{5, 4}));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
  EXPECT_THROW(fuse_local_global(local, random_tensor({4, 4}, rng), fusion, rel, pad),
               DimensionError);
}

TEST(Fusion, Gradient) {
  std::mt19937_64 rng(20);
  FusionParams fusion = random_fusion(4, rng);
  const RelPosTable rel = random_rel(2, 4, rng);
  Tensor local = random_tensor({4, 4}, rng), global = random_tensor({4, 4}, rng);
  Tensor w = random_tensor({4, 4}, rng, -1, 1, false);
  const std::vector<std::uint8_t> pad{1, 1, 1, 0};
  std::vector<Tensor> params{local, global, fusion.w, fusion.bias, fusion.encoder.ffn_in,
                             fusion.encoder.attention.w_q[0], fusion.encoder.attention.w_o};
  const auto report = grad_check(
      [&] { return sum(mul(fuse_local_global(local, global, fusion, rel, pad), w)); }, params);
  EXPECT_LT(report.max_relative_error, 1e-5) << "worst at " << report.worst_param;
}
