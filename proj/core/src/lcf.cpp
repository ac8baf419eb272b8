#include "dlcf/lcf.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "dlcf/errors.hpp"

namespace dlcf {

int SrdProfile::max() const {
  return values.empty() ? 0 : *std::max_element(values.begin(), values.end());
}

std::string_view to_string(LcfMode mode) {
  switch (mode) {
    case LcfMode::kCdm: return "cdm";
    case LcfMode::kCdw: return "cdw";
    case LcfMode::kOff: return "off";
  }
  return "cdm";
}

LcfMode parse_lcf_mode(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "cdm") return LcfMode::kCdm;
  if (lower == "cdw") return LcfMode::kCdw;
  if (lower == "off") return LcfMode::kOff;
  throw ConfigError("lcf mode must be one of cdm, cdw, off; got '" + std::string(text) + "'");
}

SrdProfile compute_srd(std::size_t n, const AspectSpan& span) {
  if (span.token_start > span.token_end || span.token_end >= n) {
    throw ContractError("aspect span [" + std::to_string(span.token_start) + ", " +
                        std::to_string(span.token_end) + "] outside a sequence of " +
                        std::to_string(n) + " tokens");
  }
  SrdProfile srd;
  srd.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < span.token_start) {
      srd.values[i] = static_cast<int>(span.token_start - i);
    } else if (i > span.token_end) {
      srd.values[i] = static_cast<int>(i - span.token_end);
    } else {
      srd.values[i] = 0;
    }
  }
  return srd;
}

Tensor cdm_mask(const SrdProfile& srd, int alpha, std::size_t d_model) {
  Tensor mask({srd.size(), d_model}, 0.0);
  auto m = mask.mutable_data();
  for (std::size_t i = 0; i < srd.size(); ++i) {
    if (srd.values[i] <= alpha) std::fill_n(&m[i * d_model], d_model, 1.0);
  }
  return mask;
}

namespace {

double cdw_weight(int srd, int alpha, std::size_t n) {
  if (srd <= alpha) return 1.0;
  const double len = static_cast<double>(n);
  return std::max(0.0, (len - static_cast<double>(srd - alpha)) / len);
}

}  // namespace

Tensor cdw_weights(const SrdProfile& srd, int alpha, std::size_t n) {
  if (n != srd.size()) {
    throw ContractError("cdw_weights: n = " + std::to_string(n) + " but profile has " +
                        std::to_string(srd.size()) + " entries");
  }
  Tensor w({n, 1}, 0.0);
  auto ws = w.mutable_data();
  for (std::size_t i = 0; i < n; ++i) ws[i] = cdw_weight(srd.values[i], alpha, n);
  return w;
}

Tensor apply_lcf(const Tensor& features, const LcfConfig& cfg, const SrdProfile& srd) {
  if (features.rows() != srd.size()) {
    throw DimensionError("apply_lcf: features " + shape_string(features.shape()) +
                         " vs profile of " + std::to_string(srd.size()) + " tokens");
  }
  switch (cfg.mode) {
    case LcfMode::kCdm: return mul(features, cdm_mask(srd, cfg.alpha, features.cols()));
    case LcfMode::kCdw: return mul(features, cdw_weights(srd, cfg.alpha, srd.size()));
    case LcfMode::kOff: return features;
  }
  return features;
}

Tensor lcf_row_weights(const LcfConfig& cfg, const SrdProfile& srd, std::size_t rows,
                       std::size_t offset) {
  if (offset + srd.size() > rows) {
    throw DimensionError("lcf profile of " + std::to_string(srd.size()) + " tokens at row " +
                         std::to_string(offset) + " exceeds " + std::to_string(rows) + " rows");
  }
  Tensor w({rows, 1}, 1.0);
  auto ws = w.mutable_data();
  for (std::size_t i = 0; i < srd.size(); ++i) {
    const int s = srd.values[i];
    double v = 1.0;
    if (cfg.mode == LcfMode::kCdm) v = s <= cfg.alpha ? 1.0 : 0.0;
    if (cfg.mode == LcfMode::kCdw) v = cdw_weight(s, cfg.alpha, srd.size());
    ws[offset + i] = v;
  }
  return w;
}

Tensor apply_lcf_at(const Tensor& features, const LcfConfig& cfg, const SrdProfile& srd,
                    std::size_t offset) {
  if (cfg.mode == LcfMode::kOff) return features;
  return mul(features, lcf_row_weights(cfg, srd, features.rows(), offset));
}

Tensor fuse_local_global(const Tensor& local, const Tensor& global, const FusionParams& fusion,
                         const RelPosTable& rel, std::span<const std::uint8_t> pad_mask,
                         const DropoutContext& drop, AttentionTrace* trace) {
  if (local.shape() != global.shape()) {
    throw DimensionError("fuse_local_global: local " + shape_string(local.shape()) +
                         " vs global " + shape_string(global.shape()));
  }
  const Tensor joined = concat({local, global}, 1);
  const Tensor projected = add(matmul(joined, fusion.w), fusion.bias);
  return encoder_layer(projected, rel, fusion.encoder, pad_mask, drop, trace);
}

}  // namespace dlcf
