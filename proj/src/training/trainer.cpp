#include "ecpe/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "ecpe/errors.hpp"
#include "ecpe/evaluate.hpp"
#include "ecpe/loss.hpp"
#include "json.hpp"

namespace ecpe::train {

namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kDropoutStream = 2;

nlohmann::json metrics_json(const eval::Metrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}};
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw ParameterError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
  if (!(lambda_l2 >= 0.0)) throw ParameterError("lambda_l2 must be non-negative");
  if (!(beta_aux >= 0.0)) throw ParameterError("beta_aux must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("dropout must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("eta must lie in (0, 1)");
}

StepStats train_step(net::Parameters& params, ad::AdamState& state, const corpus::Batch& batch,
                     const TrainConfig& config, Rng& dropout_rng) {
  ad::Tape tape;
  net::BoundParameters bound = net::bind(tape, params);
  net::ForwardOptions opt;
  opt.training = true;
  opt.dropout = config.dropout;
  opt.epsilon = config.epsilon;
  opt.use_position = config.ablation.use_position;
  opt.aux_heads = config.effective_beta() != 0.0;
  opt.rng = &dropout_rng;
  auto graphs = net::forward(bound, batch, opt);
  LossTerms terms = batch_loss(graphs, batch, bound, config.effective_beta(), config.lambda_l2);
  const double loss = terms.total.value()[0];
  if (!std::isfinite(loss)) throw NumericError("loss is not finite");
  tape.backward(terms.total);
  auto named = params.named();
  ad::adam_step(named, state, config.learning_rate);
  return {loss, terms.pair, terms.aux, terms.penalty, terms.clamped};
}

double TrainLog::mean_epoch_seconds() const {
  if (epochs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : epochs) total += e.seconds;
  return total / static_cast<double>(epochs.size());
}

std::string trainlog_jsonl(const TrainLog& log) {
  std::string out;
  for (const auto& e : log.epochs) {
    nlohmann::json j = {{"epoch", e.epoch},         {"loss", e.loss},       {"pair_loss", e.pair_loss},
                        {"aux_loss", e.aux_loss}, {"clamped", e.clamped}};
    if (e.dev) {
      j["dev"] = {{"pair", metrics_json(e.dev->pair)},
                  {"emotion", metrics_json(e.dev->emotion)},
                  {"cause", metrics_json(e.dev->cause)}};
    }
    if (log.best_epoch) j["selected"] = (*log.best_epoch == e.epoch);
    out += j.dump() + "\n";
  }
  return out;
}

std::string timing_jsonl(const TrainLog& log) {
  std::string out;
  for (const auto& e : log.epochs) out += nlohmann::json{{"epoch", e.epoch}, {"seconds", e.seconds}}.dump() + "\n";
  return out;
}

TrainResult train(net::Parameters initial, std::span<const corpus::Document> train_docs, const TrainConfig& config,
                  std::span<const corpus::Document> dev_docs, const EpochCallback& on_epoch) {
  config.validate();
  if (train_docs.empty()) throw DegenerateInputError("train: no training documents");

  TrainResult result{std::move(initial), {}};
  net::Parameters& params = result.params;
  std::optional<net::Parameters> best;
  double best_f1 = -1.0;

  Rng shuffle_rng(mix_seed(config.seed, kShuffleStream));
  Rng dropout_rng(mix_seed(config.seed, kDropoutStream));
  ad::AdamState adam;
  std::vector<std::size_t> order(train_docs.size());

  eval::EvalOptions dev_opt;
  dev_opt.eta = config.eta;
  dev_opt.epsilon = config.epsilon;
  dev_opt.use_position = config.ablation.use_position;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t batch_no = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<corpus::Document> docs;
      docs.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) docs.push_back(train_docs[order[i]]);
      StepStats s;
      try {
        s = train_step(params, adam, corpus::make_batch(docs), config, dropout_rng);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_no + 1) + ": " +
                           e.what());
      }
      rec.loss += s.loss;
      rec.pair_loss += s.pair;
      rec.aux_loss += s.aux;
      rec.clamped += s.clamped;
    }
    const double n = static_cast<double>(train_docs.size());
    rec.loss /= n;
    rec.pair_loss /= n;
    rec.aux_loss /= n;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!dev_docs.empty()) {
      rec.dev = eval::evaluate(params, dev_docs, dev_opt);
      if (rec.dev->pair.f1 > best_f1) {
        best_f1 = rec.dev->pair.f1;
        best = params;
        result.log.best_epoch = epoch;
      }
    }
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (best) params = std::move(*best);
  return result;
}

}  // namespace ecpe::train
