#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "dlcf/tensor.hpp"

namespace dlcf {

struct GradCheckReport {
  // max over parameter entries of |analytic - numeric| / max(1, |analytic|)
  double max_relative_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

// Compares reverse-mode gradients of a scalar loss against central finite
// differences (f(theta+h) - f(theta-h)) / 2h for every entry of `params`.
//
// `loss_fn` must rebuild the loss from the current parameter values on each
// call and be deterministic; two evaluations at the same point that differ
// bitwise (e.g. dropout drawing from a live RNG) raise ContractError.
// Parameter values are restored before returning. Existing gradients on
// `params` are overwritten.
GradCheckReport grad_check(const std::function<Tensor()>& loss_fn, std::span<Tensor> params,
                           double step = 1e-5);

}  // namespace dlcf
