#include "ecpe/evaluate.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "ecpe/errors.hpp"

namespace ecpe::eval {

namespace {

template <typename T>
using ByDoc = std::map<std::string, std::set<T>>;

Metrics mean_of(std::span<const Metrics> ms) {
  Metrics out;
  for (const Metrics& m : ms) {
    out.tp += m.tp;
    out.fp += m.fp;
    out.fn += m.fn;
    out.precision += m.precision;
    out.recall += m.recall;
    out.f1 += m.f1;
  }
  if (!ms.empty()) {
    const double n = static_cast<double>(ms.size());
    out.precision /= n;
    out.recall /= n;
    out.f1 /= n;
  }
  return out;
}

std::vector<corpus::Document> select(std::span<const corpus::Document> docs, const std::vector<std::string>& ids,
                                     const std::map<std::string, std::size_t>& index) {
  std::vector<corpus::Document> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(docs[index.at(id)]);
  return out;
}

}  // namespace

std::vector<Prediction> predict(const net::Parameters& params, std::span<const corpus::Document> docs,
                                const EvalOptions& options) {
  std::vector<Prediction> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    net::ForwardOutputs f = net::infer(params, doc, options.epsilon, options.use_position);
    out.push_back({doc.doc_id, doc.size(), decode_pairs(f.m_hat, options.eta, doc.size()), decode_aux(f.y_emotion),
                   decode_aux(f.y_cause)});
  }
  return out;
}

TaskMetrics score(std::span<const Prediction> predictions, std::span<const corpus::Document> gold,
                  Averaging averaging) {
  ByDoc<corpus::ClausePair> pred_pairs, gold_pairs;
  ByDoc<std::size_t> pred_emo, gold_emo, pred_cause, gold_cause;
  for (const auto& p : predictions) {
    if (!pred_pairs.emplace(p.doc_id, p.pairs).second) {
      throw ContractError("score: duplicate doc_id '" + p.doc_id + "'");
    }
    pred_emo.emplace(p.doc_id, p.emotions);
    pred_cause.emplace(p.doc_id, p.causes);
  }
  for (const auto& d : gold) {
    gold_pairs.emplace(d.doc_id, d.pairs);
    gold_emo.emplace(d.doc_id, d.emotions);
    gold_cause.emplace(d.doc_id, d.causes);
  }
  return {prf1(pred_pairs, gold_pairs, averaging), prf1(pred_emo, gold_emo, averaging),
          prf1(pred_cause, gold_cause, averaging)};
}

TaskMetrics evaluate(const net::Parameters& params, std::span<const corpus::Document> docs,
                     const EvalOptions& options) {
  const auto predictions = predict(params, docs, options);
  return score(predictions, docs, options.averaging);
}

std::vector<SweepRow> threshold_sweep(const net::Parameters& params, std::span<const corpus::Document> docs,
                                      std::span<const double> etas, const EvalOptions& options) {
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] > 0.0 && etas[i] < 1.0)) throw ParameterError("threshold_sweep: eta must lie in (0, 1)");
    if (i > 0 && !(etas[i] > etas[i - 1])) throw ParameterError("threshold_sweep: etas must be ascending");
  }
  std::vector<ad::Tensor> cached;
  cached.reserve(docs.size());
  ByDoc<corpus::ClausePair> gold;
  for (const auto& doc : docs) {
    cached.push_back(net::infer(params, doc, options.epsilon, options.use_position).m_hat);
    gold.emplace(doc.doc_id, doc.pairs);
  }
  std::vector<SweepRow> rows;
  for (double eta : etas) {
    ByDoc<corpus::ClausePair> pred;
    std::size_t count = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      PairSet pairs = decode_pairs(cached[i], eta, docs[i].size());
      count += pairs.size();
      pred.emplace(docs[i].doc_id, std::move(pairs));
    }
    rows.push_back({eta, prf1(pred, gold, options.averaging), count});
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "eta,precision,recall,f1\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", r.eta, r.pair.precision, r.pair.recall, r.pair.f1);
    out += line;
  }
  return out;
}

TaskMetrics mean_metrics(std::span<const FoldResult> folds) {
  std::vector<Metrics> pair, emotion, cause;
  for (const auto& f : folds) {
    pair.push_back(f.metrics.pair);
    emotion.push_back(f.metrics.emotion);
    cause.push_back(f.metrics.cause);
  }
  return {mean_of(pair), mean_of(emotion), mean_of(cause)};
}

CrossValidationResult cross_validate(std::span<const corpus::Document> docs, const CrossValidationConfig& config) {
  config.train.validate();
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    ids.push_back(docs[i].doc_id);
    if (!index.emplace(docs[i].doc_id, i).second) {
      throw ContractError("cross_validate: duplicate doc_id '" + docs[i].doc_id + "'");
    }
  }
  const corpus::FoldSplit split = corpus::make_folds(ids, config.folds, config.seed, config.mode);

  std::vector<FoldResult> results(split.folds.size());
  std::vector<std::exception_ptr> errors(split.folds.size());
  auto run_fold = [&](std::size_t k) {
    try {
      const auto& fold = split.folds[k];
      auto train_docs = select(docs, fold.train_ids, index);
      auto test_docs = select(docs, fold.test_ids, index);
      train::TrainConfig tc = config.train;
      tc.seed = mix_seed(config.seed, k);
      Rng init_rng(mix_seed(tc.seed, 0));
      net::Parameters init = net::init_params(config.model, init_rng, config.embedding);
      train::TrainResult trained = train::train(std::move(init), train_docs, tc);
      results[k] = {k, train_docs.size(), test_docs.size(), evaluate(trained.params, test_docs, config.eval),
                    trained.log.mean_epoch_seconds()};
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, split.folds.size()));
  if (jobs == 1) {
    for (std::size_t k = 0; k < split.folds.size(); ++k) run_fold(k);
  } else {
    std::size_t next = 0;
    std::mutex mu;
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t k;
          {
            std::lock_guard lock(mu);
            if (next >= split.folds.size()) return;
            k = next++;
          }
          run_fold(k);
        }
      });
    }
  }
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const std::exception& e) {
      throw Error("fold " + std::to_string(k) + ": " + e.what());
    }
  }
  CrossValidationResult out;
  out.folds = std::move(results);
  out.mean = mean_metrics(out.folds);
  return out;
}

double time_epoch(net::Parameters params, std::span<const corpus::Document> docs, const train::TrainConfig& config) {
  train::TrainConfig one = config;
  one.epochs = 1;
  return train::train(std::move(params), docs, one).log.epochs.front().seconds;
}

}  // namespace ecpe::eval
