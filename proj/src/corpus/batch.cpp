#include "ecpe/batch.hpp"

#include <algorithm>

#include "ecpe/errors.hpp"
#include "ecpe/vocabulary.hpp"

namespace ecpe::corpus {

std::vector<std::int32_t> Batch::clause_tokens(std::size_t b, std::size_t c) const {
  std::vector<std::int32_t> out;
  for (std::size_t t = 0; t < max_tokens; ++t) {
    const std::size_t i = token_index(b, c, t);
    if (token_mask[i]) out.push_back(tokens[i]);
  }
  return out;
}

Batch make_batch(std::span<const Document> docs) {
  if (docs.empty()) throw DegenerateInputError("make_batch: no documents");
  Batch batch;
  batch.size = docs.size();
  for (const Document& d : docs) {
    batch.max_clauses = std::max(batch.max_clauses, d.clauses.size());
    for (const auto& clause : d.clauses) batch.max_tokens = std::max(batch.max_tokens, clause.size());
  }
  const std::size_t B = batch.size;
  const std::size_t C = batch.max_clauses;
  const std::size_t L = batch.max_tokens;
  batch.tokens.assign(B * C * L, Vocabulary::kPad);
  batch.token_mask.assign(B * C * L, 0);
  batch.clause_mask.assign(B * C, 0);
  batch.emotion_labels.assign(B * C, 0);
  batch.cause_labels.assign(B * C, 0);
  batch.pair_labels.assign(B * C * C, 0);

  for (std::size_t b = 0; b < B; ++b) {
    const Document& d = docs[b];
    batch.doc_ids.push_back(d.doc_id);
    batch.lengths.push_back(d.clauses.size());
    for (std::size_t c = 0; c < d.clauses.size(); ++c) {
      batch.clause_mask[batch.clause_index(b, c)] = 1;
      for (std::size_t t = 0; t < d.clauses[c].size(); ++t) {
        batch.tokens[batch.token_index(b, c, t)] = d.clauses[c][t];
        batch.token_mask[batch.token_index(b, c, t)] = 1;
      }
    }
    for (std::size_t e : d.emotions) batch.emotion_labels[batch.clause_index(b, e)] = 1;
    for (std::size_t c : d.causes) batch.cause_labels[batch.clause_index(b, c)] = 1;
    for (const auto& [e, c] : d.pairs) batch.pair_labels[batch.pair_index(b, e, c)] = 1;
  }
  return batch;
}

std::vector<Document> unbatch(const Batch& batch) {
  std::vector<Document> docs(batch.size);
  for (std::size_t b = 0; b < batch.size; ++b) {
    Document& d = docs[b];
    d.doc_id = batch.doc_ids[b];
    for (std::size_t c = 0; c < batch.max_clauses; ++c) {
      if (!batch.clause_mask[batch.clause_index(b, c)]) continue;
      d.clauses.push_back(batch.clause_tokens(b, c));
      if (batch.emotion_labels[batch.clause_index(b, c)]) d.emotions.insert(c);
      if (batch.cause_labels[batch.clause_index(b, c)]) d.causes.insert(c);
      for (std::size_t q = 0; q < batch.max_clauses; ++q) {
        if (batch.pair_labels[batch.pair_index(b, c, q)]) d.pairs.emplace(c, q);
      }
    }
  }
  return docs;
}

}  // namespace ecpe::corpus
