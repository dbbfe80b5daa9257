#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>

#include "ecpe/document.hpp"
#include "ecpe/errors.hpp"
#include "ecpe/tensor.hpp"

namespace ecpe::eval {

using PairSet = std::set<corpus::ClausePair>;
using IndexSet = std::set<std::size_t>;

inline constexpr double kDefaultEta = 0.3;

/// {(p, q) : p, q < length and M̂[p][q] > eta}. Rows are emotion clauses.
/// Throws ParameterError unless 0 < eta < 1.
PairSet decode_pairs(const ad::Tensor& m_hat, double eta, std::size_t length);

/// Clauses whose positive-class probability exceeds 0.5.
IndexSet decode_aux(const ad::Tensor& distribution);

struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool operator==(const Metrics&) const = default;
};

/// P, R and F1 from counts; each ratio is 0 when its denominator is.
Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

double f1_score(double precision, double recall);

enum class Averaging { micro, macro };

/// Scores per-document predictions against gold over the same doc_ids
/// (ContractError otherwise). Micro sums counts over documents; macro
/// averages per-document P, R and F1 and still reports the summed counts.
template <typename T>
Metrics prf1(const std::map<std::string, std::set<T>>& predicted, const std::map<std::string, std::set<T>>& gold,
             Averaging averaging = Averaging::micro) {
  if (predicted.size() != gold.size()) throw ContractError("prf1: predicted and gold cover different documents");
  std::size_t tp = 0, fp = 0, fn = 0;
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  for (const auto& [id, pred] : predicted) {
    auto it = gold.find(id);
    if (it == gold.end()) throw ContractError("prf1: no gold entry for document '" + id + "'");
    std::size_t hit = 0;
    for (const T& x : pred) hit += it->second.count(x);
    const Metrics doc = from_counts(hit, pred.size() - hit, it->second.size() - hit);
    tp += doc.tp;
    fp += doc.fp;
    fn += doc.fn;
    p_sum += doc.precision;
    r_sum += doc.recall;
    f_sum += doc.f1;
  }
  Metrics m = from_counts(tp, fp, fn);
  if (averaging == Averaging::macro && !predicted.empty()) {
    const double n = static_cast<double>(predicted.size());
    m.precision = p_sum / n;
    m.recall = r_sum / n;
    m.f1 = f_sum / n;
  }
  return m;
}

/// Metrics for the three tasks.
struct TaskMetrics {
  Metrics pair;
  Metrics emotion;
  Metrics cause;
  bool operator==(const TaskMetrics&) const = default;
};

}  // namespace ecpe::eval
