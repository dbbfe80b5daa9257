#include "ecpe/folds.hpp"

#include <algorithm>
#include <cmath>

#include "ecpe/errors.hpp"
#include "ecpe/rng.hpp"

namespace ecpe::corpus {

SplitMode parse_split_mode(const std::string& text) {
  if (text == "within_fold") return SplitMode::within_fold;
  if (text == "standard") return SplitMode::standard;
  throw ConfigError("unknown split mode '" + text + "' (expected within_fold or standard)");
}

std::string to_string(SplitMode mode) { return mode == SplitMode::within_fold ? "within_fold" : "standard"; }

namespace {

std::size_t test_count(std::size_t n, double fraction) {
  if (n < 2 || fraction <= 0.0) return 0;
  auto t = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(t, 1, n - 1);
}

}  // namespace

FoldSplit make_folds(const std::vector<std::string>& doc_ids, std::size_t k, std::uint64_t seed, SplitMode mode,
                     double test_fraction) {
  if (k == 0) throw ParameterError("make_folds: k must be positive");
  if (doc_ids.size() < k) {
    throw ParameterError("make_folds: " + std::to_string(doc_ids.size()) + " documents cannot fill " +
                         std::to_string(k) + " folds");
  }
  std::vector<std::string> order = doc_ids;
  Rng rng(seed);
  shuffle(order, rng);

  FoldSplit split;
  split.mode = mode;
  split.folds.resize(k);
  for (std::size_t i = 0; i < order.size(); ++i) split.folds[i % k].assigned.push_back(order[i]);

  for (std::size_t f = 0; f < k; ++f) {
    Fold& fold = split.folds[f];
    if (mode == SplitMode::within_fold) {
      const std::size_t n_test = test_count(fold.assigned.size(), test_fraction);
      const std::size_t n_train = fold.assigned.size() - n_test;
      fold.train_ids.assign(fold.assigned.begin(), fold.assigned.begin() + static_cast<std::ptrdiff_t>(n_train));
      fold.test_ids.assign(fold.assigned.begin() + static_cast<std::ptrdiff_t>(n_train), fold.assigned.end());
    } else {
      fold.test_ids = fold.assigned;
      for (std::size_t g = 0; g < k; ++g) {
        if (g == f) continue;
        fold.train_ids.insert(fold.train_ids.end(), split.folds[g].assigned.begin(), split.folds[g].assigned.end());
      }
    }
  }
  return split;
}

std::pair<std::vector<std::string>, std::vector<std::string>> holdout_split(std::vector<std::string> ids,
                                                                            double test_fraction, std::uint64_t seed) {
  Rng rng(seed);
  shuffle(ids, rng);
  const std::size_t n_test = test_count(ids.size(), test_fraction);
  std::vector<std::string> test(ids.end() - static_cast<std::ptrdiff_t>(n_test), ids.end());
  ids.resize(ids.size() - n_test);
  return {std::move(ids), std::move(test)};
}

}  // namespace ecpe::corpus
