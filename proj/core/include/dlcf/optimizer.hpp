#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dlcf/tensor.hpp"

namespace dlcf {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

// One bias-corrected Adam update of `param` in place; `t` is the 1-based
// step count. State vectors are sized (zero-filled) on first use.
void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state,
               std::size_t t, const AdamConfig& cfg);

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig cfg);

  // Applies one update from the current gradients (missing gradients count
  // as zero) and advances the step counter.
  void step();
  void zero_grad();
  std::size_t steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<AdamState> state_;
  AdamConfig cfg_;
  std::size_t t_ = 0;
};

}  // namespace dlcf
