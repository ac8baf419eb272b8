#include "dlcf/attention.hpp"

#include <algorithm>
#include <cmath>

#include "dlcf/errors.hpp"

namespace dlcf {

std::size_t rel_bucket(std::size_t i, std::size_t j, int max_distance) {
  const auto k = static_cast<long long>(max_distance);
  const long long offset = static_cast<long long>(i) - static_cast<long long>(j);
  return static_cast<std::size_t>(std::clamp(offset, -k, k - 1) + k);
}

void AttentionParams::validate() const {
  const std::size_t h = w_q.size();
  if (h == 0) throw ConfigError("attention needs at least one head");
  if (w_k.size() != h || w_v.size() != h || w_qr.size() != h || w_kr.size() != h) {
    throw ConfigError("attention projections disagree on the number of heads");
  }
  if (terms.count() == 0) throw ConfigError("at least one attention term must be enabled");
  const std::size_t d = w_o.rows(), dh = d_head();
  if (w_o.cols() != d) throw ConfigError("output projection must be square");
  if (h * dh != d) throw ConfigError("d_model must equal heads * d_head");
  for (const auto* group : {&w_q, &w_k, &w_v, &w_qr, &w_kr}) {
    for (const auto& w : *group) {
      if (w.rows() != d || w.cols() != dh) {
        throw ConfigError("head projection has shape " + shape_string(w.shape()) +
                          ", expected [" + std::to_string(d) + "x" + std::to_string(dh) + "]");
      }
    }
  }
}

Tensor disentangled_scores(const Tensor& hidden, const RelPosTable& rel,
                           const AttentionParams& params, std::size_t head) {
  const std::size_t n = hidden.rows();
  const auto& terms = params.terms;
  const int k = rel.max_distance;
  if (k < 1) throw ConfigError("relative position table needs max_distance >= 1");
  if (rel.embeddings.rows() != 2 * static_cast<std::size_t>(k)) {
    throw DimensionError("relative position table has " + std::to_string(rel.embeddings.rows()) +
                         " rows, expected " + std::to_string(2 * k));
  }
  if (terms.count() == 0) throw ConfigError("at least one attention term must be enabled");

  // forward[i*n+j] = bucket(i,j), backward_[i*n+j] = bucket(j,i)
  std::vector<std::size_t> rows_i(n * n), rows_j(n * n), fwd(n * n), bwd(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      rows_i[i * n + j] = i;
      rows_j[i * n + j] = j;
      fwd[i * n + j] = rel_bucket(i, j, k);
      bwd[i * n + j] = rel_bucket(j, i, k);
    }

  const bool need_q = terms.c2c || terms.c2p;
  const bool need_k = terms.c2c || terms.p2c;
  const bool need_qr = terms.p2c || terms.p2p;
  const bool need_kr = terms.c2p || terms.p2p;
  Tensor q = need_q ? matmul(hidden, params.w_q[head]) : Tensor();
  Tensor key = need_k ? matmul(hidden, params.w_k[head]) : Tensor();
  Tensor qr = need_qr ? matmul(rel.embeddings, params.w_qr[head]) : Tensor();
  Tensor kr = need_kr ? matmul(rel.embeddings, params.w_kr[head]) : Tensor();

  Tensor total;
  auto accumulate = [&total](const Tensor& term) { total = total.defined() ? add(total, term) : term; };
  if (terms.c2c) accumulate(matmul(q, transpose(key)));
  if (terms.c2p) accumulate(gather2d(matmul(q, transpose(kr)), rows_i, fwd, n, n));
  if (terms.p2c) accumulate(gather2d(matmul(key, transpose(qr)), rows_j, bwd, n, n));
  if (terms.p2p) accumulate(gather2d(matmul(qr, transpose(kr)), fwd, bwd, n, n));

  const double denom = std::sqrt(static_cast<double>(terms.count()) *
                                 static_cast<double>(params.d_head()));
  return scale(total, 1.0 / denom);
}

Tensor key_mask(std::span<const std::uint8_t> pad_mask) {
  const std::size_t n = pad_mask.size();
  Tensor mask({n, n}, 0.0);
  auto m = mask.mutable_data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = pad_mask[j] ? 1.0 : 0.0;
  return mask;
}

Tensor mhsa(const Tensor& hidden, const RelPosTable& rel, const AttentionParams& params,
            std::span<const std::uint8_t> pad_mask, const DropoutContext& drop,
            AttentionTrace* trace) {
  const std::size_t n = hidden.rows();
  if (hidden.cols() != params.d_model()) {
    throw DimensionError("mhsa: hidden " + shape_string(hidden.shape()) + " vs d_model " +
                         std::to_string(params.d_model()));
  }
  if (pad_mask.size() != n) {
    throw DimensionError("mhsa: pad mask has " + std::to_string(pad_mask.size()) +
                         " entries for " + std::to_string(n) + " positions");
  }
  if (std::none_of(pad_mask.begin(), pad_mask.end(), [](std::uint8_t v) { return v != 0; })) {
    throw DegenerateRowError("mhsa: every position is padding");
  }
  const Tensor mask = key_mask(pad_mask);
  std::vector<Tensor> heads;
  heads.reserve(params.heads());
  for (std::size_t h = 0; h < params.heads(); ++h) {
    Tensor weights = softmax_rows(disentangled_scores(hidden, rel, params, h), mask);
    if (trace) trace->head_weights.push_back(weights);
    heads.push_back(matmul(drop(weights), matmul(hidden, params.w_v[h])));
  }
  Tensor joined = heads.size() == 1 ? heads.front() : concat(heads, 1);
  return matmul(joined, params.w_o);
}

Tensor encoder_layer(const Tensor& hidden, const RelPosTable& rel, const EncoderParams& enc,
                     std::span<const std::uint8_t> pad_mask, const DropoutContext& drop,
                     AttentionTrace* trace) {
  const Tensor attended = mhsa(hidden, rel, enc.attention, pad_mask, drop, trace);
  const Tensor x = layer_norm(add(hidden, drop(attended)), enc.ln1_gamma, enc.ln1_beta,
                              kLayerNormEps);
  const Tensor inner = gelu(add(matmul(x, enc.ffn_in), enc.ffn_in_bias));
  const Tensor ffn = add(matmul(inner, enc.ffn_out), enc.ffn_out_bias);
  return layer_norm(add(x, drop(ffn)), enc.ln2_gamma, enc.ln2_beta, kLayerNormEps);
}

}  // namespace dlcf
