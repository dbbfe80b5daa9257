#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ecpe::corpus {

/// How a fold becomes a train/test split.
///  - within_fold: each fold's own documents are divided 90/10 into train
///    and test, so every experiment sees one tenth of the corpus.
///  - standard: the fold is the test set and all other folds train.
enum class SplitMode { within_fold, standard };

SplitMode parse_split_mode(const std::string& text);
std::string to_string(SplitMode mode);

struct Fold {
  std::vector<std::string> assigned;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

struct FoldSplit {
  SplitMode mode = SplitMode::within_fold;
  std::vector<Fold> folds;
};

/// Seeded shuffle followed by round-robin assignment into k folds.
/// Throws ParameterError when fewer than k documents are given.
FoldSplit make_folds(const std::vector<std::string>& doc_ids, std::size_t k, std::uint64_t seed,
                     SplitMode mode = SplitMode::within_fold, double test_fraction = 0.1);

/// Deterministically splits ids into (train, test) with the given test
/// fraction, keeping at least one document on each side when n ≥ 2.
std::pair<std::vector<std::string>, std::vector<std::string>> holdout_split(std::vector<std::string> ids,
                                                                            double test_fraction, std::uint64_t seed);

}  // namespace ecpe::corpus
