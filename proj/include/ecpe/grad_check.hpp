#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "ecpe/tape.hpp"

namespace ecpe::ad {

/// Builds a scalar objective on the given tape, reading the checked
/// parameters through Tape::parameter.
using Objective = std::function<Var(Tape&)>;

struct GradCheckResult {
  /// max |analytic − numeric| / max(1, |numeric|) over all components.
  double max_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_component = 0;
};

/// Compares reverse-mode gradients of `objective` against central differences
/// with step `h` ∈ [1e-7, 1e-3]. Every parameter must require grad. Throws
/// ContractError if two evaluations at the same point disagree.
GradCheckResult grad_check(const Objective& objective, std::span<Tensor* const> params, double h = 1e-5);

}  // namespace ecpe::ad
