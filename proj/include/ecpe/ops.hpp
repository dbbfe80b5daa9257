#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ecpe/rng.hpp"
#include "ecpe/tape.hpp"

namespace ecpe::ad {

// Differentiable operations. Every function records one node (lstm_step
// records several) on the tape its inputs belong to. Vectors are rank-1
// tensors; matrices are rank-2 and row-major.

enum class Elementwise { add, sub, mul, relu, sigmoid, tanh };

/// Binary kinds (add, sub, mul) require `y` with the same shape as `x`;
/// unary kinds ignore it.
Var elementwise(Elementwise kind, Var x, std::optional<Var> y = std::nullopt);

inline Var add(Var x, Var y) { return elementwise(Elementwise::add, x, y); }
inline Var sub(Var x, Var y) { return elementwise(Elementwise::sub, x, y); }
inline Var mul(Var x, Var y) { return elementwise(Elementwise::mul, x, y); }
inline Var relu(Var x) { return elementwise(Elementwise::relu, x); }
inline Var sigmoid(Var x) { return elementwise(Elementwise::sigmoid, x); }
inline Var tanh(Var x) { return elementwise(Elementwise::tanh, x); }

/// Numerically stable logistic function.
double sigmoid(double x);

Var scale(Var x, double factor);

/// Adds `bias` [m] to every row of `x` [n×m] (or to a vector [m]).
Var add_bias(Var x, Var bias);

/// [m×k]·[k×n] -> [m×n]. A vector `a` [k] is read as a row and yields [n].
Var matmul(Var a, Var b);

Var transpose(Var x);

/// x·Wᵀ + b for weight [out×in]; x is [n×in] or a vector [in].
Var linear(Var x, Var weight, std::optional<Var> bias = std::nullopt);

/// One-dimensional convolution with "same" zero padding: left pad
/// ⌊(k−1)/2⌋, right pad ⌈(k−1)/2⌉, so the output keeps the input length.
/// seq [L×d_in], kernel [k×d_in×d_out], bias [d_out] -> [L×d_out].
Var conv1d_same(Var seq, Var kernel, Var bias);

/// Column-wise maximum of [L×d] -> [d]. Ties route the gradient to the
/// first maximal row.
Var max_over_time(Var seq);

/// Concatenates vectors in order.
Var concat(std::span<const Var> parts);

/// Stacks equal-length vectors into a matrix, one per row.
Var stack_rows(std::span<const Var> rows);

/// Row `i` of a matrix, as a vector.
Var row(Var x, std::size_t i);

/// Contiguous sub-range of a vector.
Var slice(Var x, std::size_t offset, std::size_t length);

/// Row-wise softmax with max subtraction; a vector is one row.
Var softmax_rows(Var x);

/// Inverted dropout. Identity when !training or p == 0; otherwise zeroes each
/// element with probability p and scales survivors by 1/(1−p).
Var dropout(Var x, double p, bool training, Rng& rng);

/// Selects rows of `table` [V×d] -> [n×d]. Throws IndexError for ids ≥ V.
Var gather_rows(Var table, std::span<const std::int32_t> ids);

/// Sum of all elements, as a scalar.
Var sum(Var x);

/// Σ x² over rows at index ≥ skip_rows (all elements of a vector when 0).
Var sum_squares(Var x, std::size_t skip_rows = 0);

/// Weights of one LSTM direction; gate blocks stacked in order input,
/// forget, cell, output. w_ih [4h×in], w_hh [4h×h], bias [4h].
struct LstmCell {
  Var w_ih;
  Var w_hh;
  Var bias;
};

struct LstmState {
  Var h;
  Var c;
};

/// i,f,o = σ(·), g = tanh(·), c = f⊙c_prev + i⊙g, h = o⊙tanh(c).
LstmState lstm_step(Var x, const LstmState& prev, const LstmCell& cell);

}  // namespace ecpe::ad
