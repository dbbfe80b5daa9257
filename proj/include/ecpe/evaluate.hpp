#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecpe/folds.hpp"
#include "ecpe/metrics.hpp"
#include "ecpe/network.hpp"
#include "ecpe/trainer.hpp"

namespace ecpe::eval {

struct EvalOptions {
  double eta = kDefaultEta;
  double epsilon = 1.0;
  bool use_position = true;
  Averaging averaging = Averaging::micro;
};

struct Prediction {
  std::string doc_id;
  std::size_t length = 0;
  PairSet pairs;
  IndexSet emotions;
  IndexSet causes;
};

/// Eval-mode forward pass and decoding of every document. The auxiliary
/// heads are always run, whatever the training-time ablation.
std::vector<Prediction> predict(const net::Parameters& params, std::span<const corpus::Document> docs,
                                const EvalOptions& options = {});

TaskMetrics score(std::span<const Prediction> predictions, std::span<const corpus::Document> gold,
                  Averaging averaging = Averaging::micro);

/// predict followed by score; a pure function of its arguments.
TaskMetrics evaluate(const net::Parameters& params, std::span<const corpus::Document> docs,
                     const EvalOptions& options = {});

struct SweepRow {
  double eta = 0.0;
  Metrics pair;
  std::size_t predicted = 0;
};

/// Pair metrics for each threshold, reusing one forward pass per document.
/// Throws ParameterError unless etas are strictly ascending within (0, 1).
std::vector<SweepRow> threshold_sweep(const net::Parameters& params, std::span<const corpus::Document> docs,
                                      std::span<const double> etas, const EvalOptions& options = {});

/// "eta,precision,recall,f1" header and one row per threshold.
std::string sweep_csv(std::span<const SweepRow> rows);

struct CrossValidationConfig {
  std::size_t folds = 10;
  corpus::SplitMode mode = corpus::SplitMode::within_fold;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  net::ModelConfig model;
  train::TrainConfig train;
  EvalOptions eval;
  /// Initial embedding table shared by every fold; random when absent.
  std::optional<ad::Tensor> embedding;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_docs = 0;
  std::size_t test_docs = 0;
  TaskMetrics metrics;
  double mean_epoch_seconds = 0.0;
};

struct CrossValidationResult {
  std::vector<FoldResult> folds;
  /// Unweighted fold means of P, R and F1; counts are summed over folds.
  TaskMetrics mean;
};

/// Trains and evaluates every fold. Fold i uses seed mix_seed(seed, i), so
/// results do not depend on `jobs`. A failing fold aborts with its index.
CrossValidationResult cross_validate(std::span<const corpus::Document> docs, const CrossValidationConfig& config);

TaskMetrics mean_metrics(std::span<const FoldResult> folds);

/// Wall-clock seconds of one training epoch over `docs` from `params`.
double time_epoch(net::Parameters params, std::span<const corpus::Document> docs, const train::TrainConfig& config);

}  // namespace ecpe::eval
