#include "ecpe/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ecpe/errors.hpp"

namespace ecpe::ad {

namespace {

double evaluate(const Objective& objective) {
  Tape tape;
  Var loss = objective(tape);
  if (loss.size() != 1) throw ContractError("grad_check: objective must be scalar");
  return loss.value()[0];
}

}  // namespace

GradCheckResult grad_check(const Objective& objective, std::span<Tensor* const> params, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw ParameterError("grad_check: step must lie in [1e-7, 1e-3]");
  for (Tensor* p : params) {
    if (!p->requires_grad()) throw ContractError("grad_check: parameter without gradient buffer");
  }

  std::vector<std::vector<double>> analytic;
  double base = 0.0;
  {
    Tape tape;
    Var loss = objective(tape);
    base = loss.value()[0];
    tape.backward(loss);
    for (Tensor* p : params) analytic.emplace_back(p->grad().begin(), p->grad().end());
  }
  if (evaluate(objective) != base) {
    throw ContractError("grad_check: objective is not deterministic (disable dropout)");
  }

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k]->values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double plus = evaluate(objective);
      values[i] = saved - h;
      const double minus = evaluate(objective);
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double err = std::abs(analytic[k][i] - numeric) / std::max(1.0, std::abs(numeric));
      if (err > result.max_error) {
        result = {err, k, i};
      }
    }
  }
  return result;
}

}  // namespace ecpe::ad
