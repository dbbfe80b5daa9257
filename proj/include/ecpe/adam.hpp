#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecpe/tensor.hpp"

namespace ecpe::ad {

/// A trainable tensor with its display name. The first `frozen_rows` rows of
/// a matrix are never updated.
struct NamedParameter {
  std::string name;
  Tensor* tensor = nullptr;
  std::size_t frozen_rows = 0;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

/// Bias-corrected Adam update of every parameter from its grad() buffer.
/// Moment buffers are created (zeroed) on the first call. Throws NumericError
/// naming the parameter if a gradient is NaN or infinite, before any update.
void adam_step(std::span<const NamedParameter> params, AdamState& state, double learning_rate);

}  // namespace ecpe::ad
