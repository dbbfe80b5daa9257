#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ecpe/document.hpp"

namespace ecpe::corpus {

/// Distributional profile of generated corpora. Defaults follow the NEWS
/// statistics: 1746 of 2105 documents hold one pair; pair offsets split
/// 511 / 1342 / 224 / 90 over {0, 1, 2, >2}; 14 clauses on average.
struct SyntheticProfile {
  double single_pair_fraction = 0.83;
  /// Weights of relative offsets 0, 1, 2 and >2.
  std::array<double, 4> offset_weights{0.24, 0.62, 0.10, 0.04};
  /// Beyond offset 2, each further step continues with this probability.
  double long_offset_continue = 0.565;
  std::size_t max_offset = 12;
  /// Probability that a non-zero offset places the cause before the emotion.
  double cause_first = 0.8;
  double mean_clauses = 14.0;
  std::size_t min_clauses = 3;
  std::size_t max_clauses = 30;
  std::size_t min_tokens = 3;
  std::size_t max_tokens = 10;
  std::size_t filler_words = 200;
  std::size_t emotion_markers = 5;
  std::size_t cause_markers = 5;
};

/// Documents over a small synthetic vocabulary ("w<i>" fillers, "emo<i>" and
/// "cau<i>" markers). Emotion clauses carry an emotion marker and cause
/// clauses a cause marker; a multi-pair document links one emotion clause to
/// two cause clauses. Deterministic in (n_docs, seed, profile).
std::vector<RawDocument> gen_synthetic(std::size_t n_docs, std::uint64_t seed, const SyntheticProfile& profile = {});

}  // namespace ecpe::corpus
