#include "ecpe/adam.hpp"

#include <cmath>

#include "ecpe/errors.hpp"

namespace ecpe::ad {

void adam_step(std::span<const NamedParameter> params, AdamState& state, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ParameterError("adam: learning rate must be positive");
  if (state.first_moment.empty()) {
    for (const NamedParameter& p : params) {
      state.first_moment.emplace_back(p.tensor->size(), 0.0);
      state.second_moment.emplace_back(p.tensor->size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ContractError("adam: parameter list changed between steps");
  }
  for (const NamedParameter& p : params) {
    if (!p.tensor->requires_grad()) throw ContractError("adam: parameter '" + p.name + "' has no gradient");
    for (double g : p.tensor->grad()) {
      if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient in parameter '" + p.name + "'");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& tensor = *params[k].tensor;
    if (state.first_moment[k].size() != tensor.size()) {
      throw DimensionError("adam: moment buffer size mismatch for '" + params[k].name + "'");
    }
    auto values = tensor.values();
    auto grad = tensor.grad();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    const std::size_t start = tensor.rank() == 2 ? params[k].frozen_rows * tensor.dim(1) : 0;
    for (std::size_t i = start; i < values.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace ecpe::ad
