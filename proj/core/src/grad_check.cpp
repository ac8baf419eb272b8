#include "dlcf/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dlcf/errors.hpp"

namespace dlcf {

namespace {

double evaluate(const std::function<Tensor()>& loss_fn) {
  const Tensor loss = loss_fn();
  if (loss.size() != 1) throw ContractError("grad_check: loss must be a scalar");
  return loss.item();
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& loss_fn, std::span<Tensor> params,
                           double step) {
  if (!(step > 0.0)) throw ContractError("grad_check: step must be positive");

  std::vector<bool> previous_flags;
  for (auto& p : params) {
    previous_flags.push_back(p.requires_grad());
    p.set_requires_grad(true);
    p.mutable_grad();
    p.zero_grad();
  }

  double recorded_value = 0.0;
  {
    Tape tape;
    Tape::Recording recording(tape);
    const Tensor loss = loss_fn();
    recorded_value = loss.item();
    tape.backward(loss);
  }
  const double replay_a = evaluate(loss_fn);
  const double replay_b = evaluate(loss_fn);
  if (replay_a != recorded_value || replay_b != recorded_value) {
    throw ContractError("grad_check: loss function is not deterministic (dropout or live RNG?)");
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    auto values = p.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + step;
      const double up = evaluate(loss_fn);
      values[i] = original - step;
      const double down = evaluate(loss_fn);
      values[i] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      ++report.entries_checked;
      if (err > report.max_relative_error || report.entries_checked == 1) {
        report.max_relative_error = err;
        report.worst_param = k;
        report.worst_index = i;
        report.worst_analytic = analytic[i];
        report.worst_numeric = numeric;
      }
    }
  }

  for (std::size_t k = 0; k < params.size(); ++k) params[k].set_requires_grad(previous_flags[k]);
  return report;
}

}  // namespace dlcf
