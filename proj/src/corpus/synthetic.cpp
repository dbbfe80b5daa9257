#include "ecpe/synthetic.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "ecpe/errors.hpp"
#include "ecpe/rng.hpp"

namespace ecpe::corpus {

namespace {

std::size_t sample_offset(const SyntheticProfile& profile, Rng& rng) {
  const auto& w = profile.offset_weights;
  double total = w[0] + w[1] + w[2] + w[3];
  double u = rng.uniform() * total;
  for (std::size_t b = 0; b < 3; ++b) {
    if (u < w[b]) return b;
    u -= w[b];
  }
  std::size_t offset = 3;
  while (offset < profile.max_offset && rng.bernoulli(profile.long_offset_continue)) ++offset;
  return offset;
}

// Cause position for an emotion at `emotion` with the given offset and
// orientation, if it lies inside the document.
std::optional<std::size_t> place_cause(std::size_t emotion, std::size_t offset, bool cause_first, std::size_t n) {
  if (cause_first) {
    if (offset > emotion) return std::nullopt;
    return emotion - offset;
  }
  if (emotion + offset >= n) return std::nullopt;
  return emotion + offset;
}

}  // namespace

std::vector<RawDocument> gen_synthetic(std::size_t n_docs, std::uint64_t seed, const SyntheticProfile& profile) {
  if (profile.min_clauses < 3 || profile.max_clauses < profile.min_clauses || profile.min_tokens == 0 ||
      profile.max_tokens < profile.min_tokens || profile.filler_words == 0 || profile.emotion_markers == 0 ||
      profile.cause_markers == 0) {
    throw ParameterError("gen_synthetic: inconsistent profile");
  }
  Rng rng(seed);
  std::vector<RawDocument> docs;
  docs.reserve(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) {
    RawDocument doc;
    doc.doc_id = "synth-" + std::to_string(seed) + "-" + std::to_string(d);
    const std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(rng.poisson(profile.mean_clauses)),
                                                  profile.min_clauses, profile.max_clauses);
    const std::size_t n_pairs = rng.bernoulli(profile.single_pair_fraction) ? 1 : 2;

    // First pair: sample the offset, then an emotion position that admits it.
    std::size_t emotion = 0;
    std::size_t first_cause = 0;
    for (;;) {
      const std::size_t offset = sample_offset(profile, rng);
      const bool cause_first = offset > 0 && rng.bernoulli(profile.cause_first);
      if (offset >= n) continue;
      const std::size_t lo = cause_first ? offset : 0;
      const std::size_t hi = cause_first ? n - 1 : n - 1 - offset;
      emotion = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
      first_cause = *place_cause(emotion, offset, cause_first, n);
      break;
    }
    doc.pairs.emplace(emotion, first_cause);

    if (n_pairs == 2) {
      for (int attempt = 0; attempt < 1000 && doc.pairs.size() < 2; ++attempt) {
        const std::size_t offset = sample_offset(profile, rng);
        const bool cause_first = offset > 0 && rng.bernoulli(profile.cause_first);
        // On collision try the opposite orientation before resampling, so the
        // offset distribution is not biased against the common offsets.
        for (bool orientation : {cause_first, !cause_first}) {
          if (offset == 0 && orientation) continue;
          auto cause = place_cause(emotion, offset, orientation, n);
          if (cause && *cause != first_cause) {
            doc.pairs.emplace(emotion, *cause);
            break;
          }
        }
      }
    }
    for (const auto& [e, c] : doc.pairs) {
      doc.emotions.insert(e);
      doc.causes.insert(c);
    }

    doc.clauses.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = profile.min_tokens +
                              static_cast<std::size_t>(rng.below(profile.max_tokens - profile.min_tokens + 1));
      auto& clause = doc.clauses[i];
      for (std::size_t t = 0; t < len; ++t) clause.push_back("w" + std::to_string(rng.below(profile.filler_words)));
      if (doc.emotions.contains(i)) {
        const auto pos = static_cast<std::ptrdiff_t>(rng.below(clause.size() + 1));
        clause.insert(clause.begin() + pos, "emo" + std::to_string(rng.below(profile.emotion_markers)));
      }
      if (doc.causes.contains(i)) {
        const auto pos = static_cast<std::ptrdiff_t>(rng.below(clause.size() + 1));
        clause.insert(clause.begin() + pos, "cau" + std::to_string(rng.below(profile.cause_markers)));
      }
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace ecpe::corpus
