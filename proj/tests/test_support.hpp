#pragma once

// Test-only helpers: an independent central-difference oracle and random
// tensor generators.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ecpe/rng.hpp"
#include "ecpe/tensor.hpp"

namespace ecpe::testing {

/// Central differences of `f` with respect to every value of `x`.
inline std::vector<double> numeric_gradient(const std::function<double()>& f, ad::Tensor& x, double h = 1e-5) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double plus = f();
    x[i] = saved - h;
    const double minus = f();
    x[i] = saved;
    out[i] = (plus - minus) / (2.0 * h);
  }
  return out;
}

inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::max(1.0, std::abs(numeric[i])));
  }
  return worst;
}

inline ad::Tensor random_tensor(ad::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0,
                                bool requires_grad = true) {
  ad::Tensor t(std::move(shape));
  t.set_requires_grad(requires_grad);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace ecpe::testing
