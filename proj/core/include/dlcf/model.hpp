#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dlcf/attention.hpp"
#include "dlcf/example.hpp"
#include "dlcf/lcf.hpp"
#include "dlcf/tensor.hpp"

namespace dlcf {

struct ModelConfig {
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t d_model = 32;
  std::size_t d_ff = 64;
  int max_relative_distance = 8;
  std::size_t vocab_size = 4;
  std::size_t n_classes = kNumClasses;
  double dropout = 0.1;
  int alpha = 5;
  LcfMode mode = LcfMode::kCdm;
  bool p2p = false;
  std::uint64_t seed = 42;

  // Throws ConfigError naming the first violated constraint.
  void validate() const;

  // Flat "key = value" text, one field per line, fixed key order.
  std::string to_text() const;
  // Inverse of to_text(); unknown keys are errors.
  static ModelConfig from_text(std::string_view text);

  bool operator==(const ModelConfig&) const = default;
};

// Closed-form parameter count for a configuration.
std::size_t expected_parameter_count(const ModelConfig& config);

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Per-example intermediate values captured by a traced forward pass.
struct ForwardTrace {
  struct Entry {
    std::vector<AttentionTrace> global_layers;
    std::vector<AttentionTrace> local_layers;
    AttentionTrace fusion;
    SrdProfile srd;
    Tensor local_features;  // local branch after the LCF layer, before fusion
    Tensor lcf_weights;     // rows x 1 row weights applied to the local branch
  };
  std::vector<Entry> examples;
};

struct Prediction {
  Polarity label = Polarity::kNeutral;
  std::array<double, kNumClasses> probabilities{};
};

// DeBERTa-style encoder trunk shared by a global branch
// ([CLS] sentence [SEP] aspect [SEP]) and a local branch ([CLS] sentence [SEP])
// whose features pass the local-context layer; both are fused and the fused
// [CLS] row is classified.
class DebertaLcfModel {
 public:
  static DebertaLcfModel build(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  LcfConfig lcf_config() const { return {config_.alpha, config_.mode}; }
  // Runtime override of the local-context layer; parameters are unaffected.
  void set_lcf(const LcfConfig& cfg);

  const std::vector<NamedTensor>& parameters() const { return params_; }
  std::vector<Tensor> parameter_tensors() const;
  std::size_t parameter_count() const;
  // Copies values into the model's parameters. Names, order and shapes must
  // match exactly; throws LoadError naming the first offending tensor.
  void assign_parameters(std::span<const NamedTensor> values);

  const RelPosTable& relative_positions() const { return rel_; }
  const std::vector<EncoderParams>& encoder_layers() const { return layers_; }
  const FusionParams& fusion() const { return fusion_; }

  // Logits, batch_size x n_classes. A null rng evaluates without dropout.
  Tensor forward(const Batch& batch, std::mt19937_64* rng = nullptr,
                 ForwardTrace* trace = nullptr) const;

 private:
  DebertaLcfModel() = default;

  Tensor forward_one(const Batch& batch, std::size_t b, std::size_t aspect_room,
                     const DropoutContext& drop, ForwardTrace::Entry* trace) const;
  Tensor run_trunk(std::span<const int> ids, std::span<const std::uint8_t> mask,
                   const DropoutContext& drop, std::vector<AttentionTrace>* traces) const;

  ModelConfig config_;
  std::vector<NamedTensor> params_;
  Tensor token_embedding_;
  RelPosTable rel_;
  std::vector<EncoderParams> layers_;
  FusionParams fusion_;
  Tensor classifier_w_, classifier_b_;
};

// Class probabilities and argmax (lowest index wins ties) for one example.
Prediction predict(const DebertaLcfModel& model, const Example& example);
// Same, from logits of shape 1 x n_classes.
Prediction prediction_from_logits(std::span<const double> logits);

}  // namespace dlcf
