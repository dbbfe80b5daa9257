#include "ecpe/metrics.hpp"

namespace ecpe::eval {

PairSet decode_pairs(const ad::Tensor& m_hat, double eta, std::size_t length) {
  if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("decode_pairs: eta must lie in (0, 1)");
  if (m_hat.rank() != 2 || m_hat.dim(0) < length || m_hat.dim(1) < length) {
    throw DimensionError("decode_pairs: matrix " + ad::shape_string(m_hat.shape()) + " is smaller than length " +
                         std::to_string(length));
  }
  PairSet out;
  for (std::size_t p = 0; p < length; ++p) {
    for (std::size_t q = 0; q < length; ++q) {
      if (m_hat.at(p, q) > eta) out.emplace(p, q);
    }
  }
  return out;
}

IndexSet decode_aux(const ad::Tensor& distribution) {
  if (distribution.rank() != 2 || distribution.dim(1) != 2) {
    throw DimensionError("decode_aux: expected [C×2], got " + ad::shape_string(distribution.shape()));
  }
  IndexSet out;
  for (std::size_t i = 0; i < distribution.dim(0); ++i) {
    if (distribution.at(i, 1) > 0.5) out.insert(i);
  }
  return out;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  Metrics m{tp, fp, fn, 0.0, 0.0, 0.0};
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

}  // namespace ecpe::eval
