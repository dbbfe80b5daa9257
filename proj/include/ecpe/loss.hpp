#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ecpe/batch.hpp"
#include "ecpe/network.hpp"

namespace ecpe::train {

inline constexpr double kLogFloor = 1e-12;

/// −Σ [Y log M̂ + (1 − Y) log(1 − M̂)] over entries whose row and column are
/// both unmasked. `targets` and `mask` are [C×C] and [C]. Log arguments are
/// floored at 1e-12; each floored entry increments *clamped (if given) and
/// passes no gradient.
ad::Var pair_loss(ad::Var m_hat, std::span<const std::uint8_t> targets, std::span<const std::uint8_t> mask,
                  std::size_t* clamped = nullptr);

/// Summed negative log-likelihood of both auxiliary heads over unmasked
/// clauses. Distributions are [C×2] (negative, positive); labels are 0/1.
ad::Var aux_loss(ad::Var y_emotion, ad::Var y_cause, std::span<const std::uint8_t> emotion_labels,
                 std::span<const std::uint8_t> cause_labels, std::span<const std::uint8_t> mask);

/// Σ θ² over the given parameters, skipping each one's frozen rows.
ad::Var l2_penalty(std::span<const ad::Var> params, std::span<const std::size_t> frozen_rows);

/// L_pair + β·L_aux + λ·R. A missing term counts as zero.
ad::Var total_loss(ad::Var pair, std::optional<ad::Var> aux, std::optional<ad::Var> penalty, double beta,
                   double lambda);

struct LossTerms {
  ad::Var total;
  double pair = 0.0;
  double aux = 0.0;
  double penalty = 0.0;
  std::size_t clamped = 0;
};

/// Gold arrays of batch document b restricted to its true length.
struct DocumentTargets {
  std::vector<std::uint8_t> pairs;     // [C×C]
  std::vector<std::uint8_t> emotions;  // [C]
  std::vector<std::uint8_t> causes;    // [C]
  std::vector<std::uint8_t> mask;      // [C], all ones
};
DocumentTargets document_targets(const corpus::Batch& batch, std::size_t b);

/// The joint objective of one batch. The penalty is counted once per batch
/// and omitted when lambda is 0; the auxiliary term is omitted when the
/// graphs carry no auxiliary heads or beta is 0.
LossTerms batch_loss(const std::vector<net::DocumentGraph>& graphs, const corpus::Batch& batch,
                     const net::BoundParameters& bound, double beta, double lambda);

/// Every bound tensor of `bound`, in Parameters::named() order.
std::vector<ad::Var> bound_list(const net::BoundParameters& bound);

}  // namespace ecpe::train
