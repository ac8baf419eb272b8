#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dlcf/tensor.hpp"

namespace dlcf {

// Learned relative-position embeddings: row b embeds the clamped offset b - k.
struct RelPosTable {
  int max_distance = 8;  // k
  Tensor embeddings;     // 2k x d_model
};

// Maps the offset i - j to a table row: clamp(i - j, -k, k - 1) + k.
std::size_t rel_bucket(std::size_t i, std::size_t j, int max_distance);

// Which terms of the disentangled score are summed.
struct AttentionTerms {
  bool c2c = true;  // content to content
  bool c2p = true;  // content to position
  bool p2c = true;  // position to content
  bool p2p = false; // position to position

  int count() const { return int{c2c} + int{c2p} + int{p2c} + int{p2p}; }
};

// Per-head projections. The position projections are normally handles to
// tensors shared by every layer of a model.
struct AttentionParams {
  std::vector<Tensor> w_q, w_k, w_v;  // h tensors, d_model x d_head
  std::vector<Tensor> w_qr, w_kr;     // h tensors, d_model x d_head
  Tensor w_o;                         // d_model x d_model
  AttentionTerms terms;

  std::size_t heads() const { return w_q.size(); }
  std::size_t d_model() const { return w_o.rows(); }
  std::size_t d_head() const { return w_q.empty() ? 0 : w_q.front().cols(); }
  // Throws ConfigError when shapes or term flags are inconsistent.
  void validate() const;
};

struct EncoderParams {
  AttentionParams attention;
  Tensor ffn_in, ffn_in_bias;    // d_model x d_ff, [d_ff]
  Tensor ffn_out, ffn_out_bias;  // d_ff x d_model, [d_model]
  Tensor ln1_gamma, ln1_beta;    // [d_model]
  Tensor ln2_gamma, ln2_beta;    // [d_model]
};

inline constexpr double kLayerNormEps = 1e-12;

// Optional sink for the per-head attention weight matrices (n x n).
struct AttentionTrace {
  std::vector<Tensor> head_weights;
};

// Raw (pre-softmax) disentangled attention scores for one head, n x n.
//
//   c2c(i,j) = q_i . k_j
//   c2p(i,j) = q_i . kr[bucket(i,j)]
//   p2c(i,j) = qr[bucket(j,i)] . k_j
//   p2p(i,j) = qr[bucket(i,j)] . kr[bucket(j,i)]
//
// where q = H W_q, k = H W_k, qr = P W_qr, kr = P W_kr. The sum of enabled
// terms is divided by sqrt(T * d_head), T the number of enabled terms.
Tensor disentangled_scores(const Tensor& hidden, const RelPosTable& rel,
                           const AttentionParams& params, std::size_t head);

// n x n key mask with mask[i][j] = pad_mask[j].
Tensor key_mask(std::span<const std::uint8_t> pad_mask);

// Multi-head disentangled self-attention. Padded keys get zero weight.
Tensor mhsa(const Tensor& hidden, const RelPosTable& rel, const AttentionParams& params,
            std::span<const std::uint8_t> pad_mask, const DropoutContext& drop = {},
            AttentionTrace* trace = nullptr);

// Post-norm block: x = LN(H + MHSA(H)); LN(x + FFN(x)), FFN = gelu(x W1 + b1) W2 + b2.
Tensor encoder_layer(const Tensor& hidden, const RelPosTable& rel, const EncoderParams& enc,
                     std::span<const std::uint8_t> pad_mask, const DropoutContext& drop = {},
                     AttentionTrace* trace = nullptr);

}  // namespace dlcf
