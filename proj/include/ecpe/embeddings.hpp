#pragma once

#include <cstddef>
#include <filesystem>

#include "ecpe/rng.hpp"
#include "ecpe/tensor.hpp"
#include "ecpe/vocabulary.hpp"

namespace ecpe::corpus {

inline constexpr double kEmbeddingInitBound = 0.1;

struct EmbeddingTable {
  /// [|V|×d_e]; row 0 (PAD) is zero.
  ad::Tensor matrix;
  /// Vocabulary rows copied from the pretrained file.
  std::size_t covered = 0;
};

/// Every row uniform(−0.1, 0.1) except the zero PAD row.
EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim, Rng& rng);

/// Reads word2vec text vectors ("<count> <dim>" header, then
/// "<token> v1 ... v_dim" per line). Rows for vocabulary tokens found in the
/// file are copied; all others keep their uniform(−0.1, 0.1) initialization.
/// A missing file yields a fully random table when allow_random is set.
EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, std::size_t dim, Rng& rng,
                               bool allow_random = false);

}  // namespace ecpe::corpus
