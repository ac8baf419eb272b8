#include "dlcf/optimizer.hpp"

#include <cmath>

#include "dlcf/errors.hpp"

namespace dlcf {

void AdamConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must satisfy 0 <= beta1 < 1");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must satisfy 0 <= beta2 < 1");
  if (!(eps > 0.0)) throw ConfigError("adam eps must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state,
               std::size_t t, const AdamConfig& cfg) {
  if (t < 1) throw ContractError("adam_step: t must be >= 1");
  if (grad.size() != param.size()) throw DimensionError("adam_step: gradient size mismatch");
  if (state.m.empty()) state.m.assign(param.size(), 0.0);
  if (state.v.empty()) state.v.assign(param.size(), 0.0);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    if (cfg.weight_decay != 0.0) param[i] -= cfg.learning_rate * cfg.weight_decay * param[i];
    param[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), state_(params_.size()), cfg_(cfg) {
  cfg_.validate();
}

void Adam::step() {
  ++t_;
  std::vector<double> zeros;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    if (p.has_grad()) {
      adam_step(p.mutable_data(), p.grad(), state_[k], t_, cfg_);
    } else {
      zeros.assign(p.size(), 0.0);
      adam_step(p.mutable_data(), zeros, state_[k], t_, cfg_);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace dlcf
