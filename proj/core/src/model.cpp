#include "dlcf/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dlcf/errors.hpp"
#include "dlcf/key_value.hpp"

namespace dlcf {

// ---- ModelConfig ---------------------------------------------------------

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid model config: " + what); };
  if (layers < 1) fail("layers must be >= 1");
  if (heads < 1) fail("heads must be >= 1");
  if (d_model < 1) fail("d_model must be >= 1");
  if (d_ff < 1) fail("d_ff must be >= 1");
  if (d_model % heads != 0) {
    fail("d_model (" + std::to_string(d_model) + ") must be divisible by heads (" +
         std::to_string(heads) + ")");
  }
  if (max_relative_distance < 1) fail("max_relative_distance must be >= 1");
  if (vocab_size < 5) fail("vocab_size must cover the 4 reserved ids plus at least one token");
  if (n_classes != kNumClasses) fail("n_classes must be 3");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must satisfy 0 <= p < 1");
  if (alpha < 0) fail("alpha must be >= 0");
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os << "layers = " << layers << '\n'
     << "heads = " << heads << '\n'
     << "d_model = " << d_model << '\n'
     << "d_ff = " << d_ff << '\n'
     << "max_relative_distance = " << max_relative_distance << '\n'
     << "vocab_size = " << vocab_size << '\n'
     << "n_classes = " << n_classes << '\n'
     << "dropout = " << format_double(dropout) << '\n'
     << "alpha = " << alpha << '\n'
     << "lcf_mode = " << to_string(mode) << '\n'
     << "p2p = " << (p2p ? "true" : "false") << '\n'
     << "seed = " << seed << '\n';
  return os.str();
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  ModelConfig cfg;
  for (const auto& kv : parse_key_values(text)) {
    if (kv.key == "layers") cfg.layers = parse_size(kv);
    else if (kv.key == "heads") cfg.heads = parse_size(kv);
    else if (kv.key == "d_model") cfg.d_model = parse_size(kv);
    else if (kv.key == "d_ff") cfg.d_ff = parse_size(kv);
    else if (kv.key == "max_relative_distance") cfg.max_relative_distance = parse_int(kv);
    else if (kv.key == "vocab_size") cfg.vocab_size = parse_size(kv);
    else if (kv.key == "n_classes") cfg.n_classes = parse_size(kv);
    else if (kv.key == "dropout") cfg.dropout = parse_double(kv);
    else if (kv.key == "alpha") cfg.alpha = parse_int(kv);
    else if (kv.key == "lcf_mode") cfg.mode = parse_lcf_mode(kv.value);
    else if (kv.key == "p2p") cfg.p2p = parse_bool(kv);
    else if (kv.key == "seed") cfg.seed = parse_u64(kv);
    else throw ConfigError("line " + std::to_string(kv.line) + ": unknown model key '" + kv.key + "'");
  }
  return cfg;
}

std::size_t expected_parameter_count(const ModelConfig& c) {
  const std::size_t d = c.d_model, ff = c.d_ff;
  const std::size_t k2 = 2 * static_cast<std::size_t>(c.max_relative_distance);
  const std::size_t encoder = 4 * d * d + d * ff + ff + ff * d + d + 4 * d;
  return c.vocab_size * d        // token embeddings
         + k2 * d                // relative position table
         + 2 * d * d             // shared position projections
         + (c.layers + 1) * encoder  // trunk layers + fusion encoder
         + 2 * d * d + d         // fusion projection
         + d * c.n_classes + c.n_classes;
}

// ---- construction --------------------------------------------------------

namespace {

class ParamFactory {
 public:
  ParamFactory(std::vector<NamedTensor>& out, std::uint64_t seed) : out_(out), rng_(seed) {}

  Tensor normal(std::string name, Shape shape) {
    Tensor t(std::move(shape), 0.0, true);
    std::normal_distribution<double> dist(0.0, 0.02);
    for (auto& v : t.mutable_data()) v = dist(rng_);
    return keep(std::move(name), t);
  }

  Tensor constant(std::string name, Shape shape, double value) {
    return keep(std::move(name), Tensor(std::move(shape), value, true));
  }

 private:
  Tensor keep(std::string name, Tensor t) {
    out_.push_back({std::move(name), t});
    return t;
  }

  std::vector<NamedTensor>& out_;
  std::mt19937_64 rng_;
};

EncoderParams make_encoder(ParamFactory& f, const std::string& prefix, const ModelConfig& c,
                           const std::vector<Tensor>& w_qr, const std::vector<Tensor>& w_kr) {
  const std::size_t d = c.d_model, dh = c.d_model / c.heads;
  EncoderParams enc;
  auto& att = enc.attention;
  for (std::size_t h = 0; h < c.heads; ++h) {
    const std::string hs = ".h" + std::to_string(h);
    att.w_q.push_back(f.normal(prefix + ".attn.w_q" + hs, {d, dh}));
    att.w_k.push_back(f.normal(prefix + ".attn.w_k" + hs, {d, dh}));
    att.w_v.push_back(f.normal(prefix + ".attn.w_v" + hs, {d, dh}));
  }
  att.w_o = f.normal(prefix + ".attn.w_o", {d, d});
  att.w_qr = w_qr;
  att.w_kr = w_kr;
  att.terms.p2p = c.p2p;
  enc.ffn_in = f.normal(prefix + ".ffn.w_in", {d, c.d_ff});
  enc.ffn_in_bias = f.constant(prefix + ".ffn.b_in", {c.d_ff}, 0.0);
  enc.ffn_out = f.normal(prefix + ".ffn.w_out", {c.d_ff, d});
  enc.ffn_out_bias = f.constant(prefix + ".ffn.b_out", {d}, 0.0);
  enc.ln1_gamma = f.constant(prefix + ".ln1.gamma", {d}, 1.0);
  enc.ln1_beta = f.constant(prefix + ".ln1.beta", {d}, 0.0);
  enc.ln2_gamma = f.constant(prefix + ".ln2.gamma", {d}, 1.0);
  enc.ln2_beta = f.constant(prefix + ".ln2.beta", {d}, 0.0);
  return enc;
}

}  // namespace

DebertaLcfModel DebertaLcfModel::build(const ModelConfig& config) {
  config.validate();
  DebertaLcfModel m;
  m.config_ = config;
  ParamFactory f(m.params_, config.seed);
  const std::size_t d = config.d_model, dh = config.d_model / config.heads;
  const auto k = static_cast<std::size_t>(config.max_relative_distance);

  m.token_embedding_ = f.normal("embedding.tokens", {config.vocab_size, d});
  m.rel_.max_distance = config.max_relative_distance;
  m.rel_.embeddings = f.normal("relative.positions", {2 * k, d});
  std::vector<Tensor> w_qr, w_kr;
  for (std::size_t h = 0; h < config.heads; ++h) {
    w_qr.push_back(f.normal("relative.w_qr.h" + std::to_string(h), {d, dh}));
    w_kr.push_back(f.normal("relative.w_kr.h" + std::to_string(h), {d, dh}));
  }
  for (std::size_t l = 0; l < config.layers; ++l) {
    m.layers_.push_back(make_encoder(f, "encoder." + std::to_string(l), config, w_qr, w_kr));
  }
  m.fusion_.w = f.normal("fusion.w", {2 * d, d});
  m.fusion_.bias = f.constant("fusion.b", {d}, 0.0);
  m.fusion_.encoder = make_encoder(f, "fusion.encoder", config, w_qr, w_kr);
  m.classifier_w_ = f.normal("classifier.w", {d, config.n_classes});
  m.classifier_b_ = f.constant("classifier.b", {config.n_classes}, 0.0);
  return m;
}

void DebertaLcfModel::set_lcf(const LcfConfig& cfg) {
  if (cfg.alpha < 0) throw ConfigError("alpha must be >= 0");
  config_.alpha = cfg.alpha;
  config_.mode = cfg.mode;
}

std::vector<Tensor> DebertaLcfModel::parameter_tensors() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

std::size_t DebertaLcfModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void DebertaLcfModel::assign_parameters(std::span<const NamedTensor> values) {
  if (values.size() != params_.size()) {
    throw LoadError("expected " + std::to_string(params_.size()) + " parameter tensors, got " +
                    std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].name != params_[i].name) {
      throw LoadError("parameter " + std::to_string(i) + " is '" + values[i].name + "', expected '" +
                      params_[i].name + "'");
    }
    if (values[i].value.shape() != params_[i].value.shape()) {
      throw LoadError("parameter '" + values[i].name + "' has shape " +
                      shape_string(values[i].value.shape()) + ", model expects " +
                      shape_string(params_[i].value.shape()));
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto src = values[i].value.data();
    auto dst = params_[i].value.mutable_data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

// ---- forward -------------------------------------------------------------

Tensor DebertaLcfModel::run_trunk(std::span<const int> ids, std::span<const std::uint8_t> mask,
                                  const DropoutContext& drop,
                                  std::vector<AttentionTrace>* traces) const {
  Tensor hidden = drop(embedding_gather(token_embedding_, ids));
  for (const auto& layer : layers_) {
    AttentionTrace* t = nullptr;
    if (traces) t = &traces->emplace_back();
    hidden = encoder_layer(hidden, rel_, layer, mask, drop, t);
  }
  return hidden;
}

Tensor DebertaLcfModel::forward_one(const Batch& batch, std::size_t b, std::size_t aspect_room,
                                    const DropoutContext& drop, ForwardTrace::Entry* trace) const {
  const std::size_t len = batch.length(b);
  const auto tokens = batch.tokens(b).first(len);
  const AspectSpan& span = batch.spans[b];
  if (len == 0 || span.token_start > span.token_end || span.token_end >= len) {
    throw ContractError("example " + std::to_string(b) + ": aspect span [" +
                        std::to_string(span.token_start) + ", " + std::to_string(span.token_end) +
                        "] outside its " + std::to_string(len) + " real tokens");
  }
  for (int id : tokens) {
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw IndexError("example " + std::to_string(b) + ": token id " + std::to_string(id) +
                       " outside vocabulary of " + std::to_string(config_.vocab_size));
    }
  }

  // local: [CLS] sentence [SEP] pad...            (seq_len + 2 rows)
  // global: [CLS] sentence [SEP] aspect [SEP] pad... (seq_len + 3 + aspect_room rows)
  const std::size_t local_rows = batch.seq_len + 2;
  const std::size_t global_rows = batch.seq_len + 3 + aspect_room;
  std::vector<int> local_ids(local_rows, kPadId), global_ids(global_rows, kPadId);
  std::vector<std::uint8_t> local_mask(local_rows, 0), global_mask(global_rows, 0);
  local_ids[0] = global_ids[0] = kClsId;
  std::copy(tokens.begin(), tokens.end(), local_ids.begin() + 1);
  std::copy(tokens.begin(), tokens.end(), global_ids.begin() + 1);
  local_ids[len + 1] = global_ids[len + 1] = kSepId;
  std::copy(tokens.begin() + static_cast<std::ptrdiff_t>(span.token_start),
            tokens.begin() + static_cast<std::ptrdiff_t>(span.token_end) + 1,
            global_ids.begin() + static_cast<std::ptrdiff_t>(len) + 2);
  const std::size_t global_len = len + 3 + span.length();
  global_ids[global_len - 1] = kSepId;
  std::fill_n(local_mask.begin(), len + 2, 1);
  std::fill_n(global_mask.begin(), global_len, 1);

  const Tensor global_out =
      run_trunk(global_ids, global_mask, drop, trace ? &trace->global_layers : nullptr);
  const Tensor local_out =
      run_trunk(local_ids, local_mask, drop, trace ? &trace->local_layers : nullptr);

  const SrdProfile srd = compute_srd(len, span);
  const LcfConfig lcf = lcf_config();
  const Tensor local_focus = apply_lcf_at(local_out, lcf, srd, 1);
  if (trace) {
    trace->srd = srd;
    trace->local_features = local_focus;
    trace->lcf_weights = lcf_row_weights(lcf, srd, local_rows, 1);
  }

  const Tensor global_overlap = slice_rows(global_out, 0, local_rows);
  const Tensor fused = fuse_local_global(local_focus, global_overlap, fusion_, rel_, local_mask,
                                         drop, trace ? &trace->fusion : nullptr);
  const Tensor pooled = drop(slice_rows(fused, 0, 1));
  return add(matmul(pooled, classifier_w_), classifier_b_);
}

Tensor DebertaLcfModel::forward(const Batch& batch, std::mt19937_64* rng,
                                ForwardTrace* trace) const {
  if (batch.batch_size == 0) throw ContractError("forward: empty batch");
  if (batch.token_ids.size() != batch.batch_size * batch.seq_len ||
      batch.pad_mask.size() != batch.token_ids.size() || batch.spans.size() != batch.batch_size) {
    throw DimensionError("forward: batch arrays disagree with batch_size x seq_len = " +
                         std::to_string(batch.batch_size) + "x" + std::to_string(batch.seq_len));
  }
  std::size_t aspect_room = 0;
  for (const auto& s : batch.spans) aspect_room = std::max(aspect_room, s.length());

  const DropoutContext drop{config_.dropout, rng};
  if (trace) trace->examples.assign(batch.batch_size, {});
  std::vector<Tensor> rows;
  rows.reserve(batch.batch_size);
  for (std::size_t b = 0; b < batch.batch_size; ++b) {
    rows.push_back(forward_one(batch, b, aspect_room, drop, trace ? &trace->examples[b] : nullptr));
  }
  return rows.size() == 1 ? rows.front() : concat(rows, 0);
}

// ---- prediction ----------------------------------------------------------

Prediction prediction_from_logits(std::span<const double> logits) {
  if (logits.size() != kNumClasses) {
    throw DimensionError("prediction needs " + std::to_string(kNumClasses) + " logits");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  Prediction p;
  double total = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    p.probabilities[c] = std::exp(logits[c] - mx);
    total += p.probabilities[c];
  }
  std::size_t best = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    p.probabilities[c] /= total;
    if (logits[c] > logits[best]) best = c;
  }
  p.label = static_cast<Polarity>(best);
  return p;
}

Prediction predict(const DebertaLcfModel& model, const Example& example) {
  Batch batch;
  batch.batch_size = 1;
  batch.seq_len = example.token_ids.size();
  batch.token_ids = example.token_ids;
  batch.pad_mask.assign(batch.seq_len, 1);
  batch.spans = {example.span};
  batch.labels = {static_cast<int>(example.label)};
  const Tensor logits = model.forward(batch);
  return prediction_from_logits(logits.data());
}

}  // namespace dlcf
