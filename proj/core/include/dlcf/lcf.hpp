#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dlcf/attention.hpp"
#include "dlcf/tensor.hpp"

namespace dlcf {

// Aspect position inside a sentence: an inclusive token range plus the
// original [char_from, char_to) character offsets it was aligned from.
struct AspectSpan {
  std::size_t token_start = 0;
  std::size_t token_end = 0;
  std::size_t char_from = 0;
  std::size_t char_to = 0;

  std::size_t length() const { return token_end - token_start + 1; }
  bool operator==(const AspectSpan&) const = default;
};

// Semantic-relative distance of every sentence token to the aspect span.
struct SrdProfile {
  std::vector<int> values;

  std::size_t size() const { return values.size(); }
  int max() const;
};

// How features beyond the SRD threshold are treated. kOff disables the
// local-context layer entirely (ablation and reference runs).
enum class LcfMode { kCdm, kCdw, kOff };

std::string_view to_string(LcfMode mode);
// Accepts "cdm", "cdw", "off" (case-insensitive); throws ConfigError otherwise.
LcfMode parse_lcf_mode(std::string_view text);

struct LcfConfig {
  int alpha = 5;
  LcfMode mode = LcfMode::kCdm;
};

// 0 on the span, otherwise the distance to the nearest span token.
SrdProfile compute_srd(std::size_t n, const AspectSpan& span);

// n x d_model matrix; row i is all ones iff srd[i] <= alpha, else all zeros.
Tensor cdm_mask(const SrdProfile& srd, int alpha, std::size_t d_model);

// n x 1 column; 1 inside the threshold, max(0, (n - (srd - alpha)) / n) beyond.
Tensor cdw_weights(const SrdProfile& srd, int alpha, std::size_t n);

// features (n x d) masked (CDM) or row-scaled (CDW) by the SRD profile.
Tensor apply_lcf(const Tensor& features, const LcfConfig& cfg, const SrdProfile& srd);

// Sequence-level row weights (rows x 1) for a profile whose first token sits
// at row `offset`. Rows outside the profile (special tokens, padding) are
// treated as local and get weight 1.
Tensor lcf_row_weights(const LcfConfig& cfg, const SrdProfile& srd, std::size_t rows,
                       std::size_t offset);

// Same as apply_lcf for a profile embedded at `offset` in a longer sequence.
Tensor apply_lcf_at(const Tensor& features, const LcfConfig& cfg, const SrdProfile& srd,
                    std::size_t offset);

struct FusionParams {
  Tensor w;     // 2*d_model x d_model
  Tensor bias;  // [d_model]
  EncoderParams encoder;
};

// concat(local, global) along features, project back to d_model, then one
// self-attention encoder layer over the fused sequence.
Tensor fuse_local_global(const Tensor& local, const Tensor& global, const FusionParams& fusion,
                         const RelPosTable& rel, std::span<const std::uint8_t> pad_mask,
                         const DropoutContext& drop = {}, AttentionTrace* trace = nullptr);

}  // namespace dlcf
