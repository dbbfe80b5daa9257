#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecpe/document.hpp"

namespace ecpe::corpus {

/// Padded, masked view of several documents. Arrays are row-major over
/// [document × clause × token] or [document × clause × clause]. Masked
/// positions hold the PAD id and zero labels.
struct Batch {
  std::size_t size = 0;
  std::size_t max_clauses = 0;
  std::size_t max_tokens = 0;
  std::vector<std::string> doc_ids;
  std::vector<std::size_t> lengths;
  std::vector<std::int32_t> tokens;
  std::vector<std::uint8_t> clause_mask;
  std::vector<std::uint8_t> token_mask;
  std::vector<std::uint8_t> emotion_labels;
  std::vector<std::uint8_t> cause_labels;
  std::vector<std::uint8_t> pair_labels;

  std::size_t clause_index(std::size_t b, std::size_t c) const { return b * max_clauses + c; }
  std::size_t token_index(std::size_t b, std::size_t c, std::size_t t) const {
    return (b * max_clauses + c) * max_tokens + t;
  }
  std::size_t pair_index(std::size_t b, std::size_t p, std::size_t q) const {
    return (b * max_clauses + p) * max_clauses + q;
  }

  /// Unmasked token ids of clause c in document b.
  std::vector<std::int32_t> clause_tokens(std::size_t b, std::size_t c) const;
};

Batch make_batch(std::span<const Document> docs);

/// Inverse of make_batch: recovers clause tokens and gold annotations.
std::vector<Document> unbatch(const Batch& batch);

}  // namespace ecpe::corpus
