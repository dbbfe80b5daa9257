#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecpe/adam.hpp"
#include "ecpe/metrics.hpp"
#include "ecpe/network.hpp"

namespace ecpe::train {

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double lambda_l2 = 1e-5;
  double beta_aux = 1.0;
  double dropout = 0.5;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  double epsilon = 1.0;
  /// Threshold for dev-set evaluation.
  double eta = 0.3;
  net::AblationFlags ablation;

  /// β actually applied: 0 when the auxiliary tasks are ablated.
  double effective_beta() const { return ablation.use_aux ? beta_aux : 0.0; }
  /// Throws ParameterError on out-of-range values.
  void validate() const;
};

struct StepStats {
  double loss = 0.0;
  double pair = 0.0;
  double aux = 0.0;
  double penalty = 0.0;
  std::size_t clamped = 0;
};

/// forward → joint loss → backward → Adam on one batch. Throws NumericError
/// on a non-finite loss or gradient, before updating.
StepStats train_step(net::Parameters& params, ad::AdamState& state, const corpus::Batch& batch,
                     const TrainConfig& config, Rng& dropout_rng);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  /// Epoch sums divided by the number of training documents.
  double loss = 0.0;
  double pair_loss = 0.0;
  double aux_loss = 0.0;
  std::size_t clamped = 0;
  double seconds = 0.0;
  std::optional<eval::TaskMetrics> dev;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  /// Epoch whose parameters were returned, when a dev set was given.
  std::optional<std::size_t> best_epoch;

  double mean_epoch_seconds() const;
};

/// One JSON object per epoch. Wall-clock times are left out so the output is
/// reproducible; timing_jsonl carries them.
std::string trainlog_jsonl(const TrainLog& log);
std::string timing_jsonl(const TrainLog& log);

struct TrainResult {
  net::Parameters params;
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains from `initial` for config.epochs epochs with a seeded per-epoch
/// shuffle. With dev documents, each epoch is evaluated and the parameters
/// of the best dev pair F1 (earliest on ties) are returned; otherwise the
/// final parameters. NumericError messages carry epoch and batch numbers.
TrainResult train(net::Parameters initial, std::span<const corpus::Document> train_docs, const TrainConfig& config,
                  std::span<const corpus::Document> dev_docs = {}, const EpochCallback& on_epoch = {});

}  // namespace ecpe::train
