#include "ecpe/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "ecpe/checkpoint.hpp"
#include "ecpe/config.hpp"
#include "ecpe/embeddings.hpp"
#include "ecpe/errors.hpp"
#include "ecpe/evaluate.hpp"
#include "ecpe/synthetic.hpp"
#include "ecpe/vocabulary.hpp"
#include "json.hpp"

namespace ecpe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kEmbeddingStream = 3;
constexpr std::uint64_t kInitStream = 4;
constexpr std::uint64_t kDevStream = 5;

json to_json(const eval::Metrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}};
}

json to_json(const eval::TaskMetrics& t) {
  return {{"pair", to_json(t.pair)}, {"emotion", to_json(t.emotion)}, {"cause", to_json(t.cause)}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw Error("cannot write " + path.string());
}

fs::path output_dir(const RunConfig& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  write_text(dir / "config.resolved", render_config(c));
  return dir;
}

void require(const std::string& value, const std::string& key, const std::string& command) {
  if (value.empty()) throw UsageError(command + ": missing required --" + key);
}

std::vector<corpus::RawDocument> read_corpus(const RunConfig& c, const std::string& command) {
  require(c.corpus, "corpus", command);
  return corpus::load_corpus(c.corpus, c.max_clauses);
}

eval::EvalOptions eval_options(const RunConfig& c) {
  eval::EvalOptions o;
  o.eta = c.train.eta;
  o.epsilon = c.train.epsilon;
  o.use_position = c.train.ablation.use_position;
  o.averaging = c.averaging;
  return o;
}

ad::Tensor initial_embedding(const RunConfig& c, const corpus::Vocabulary& vocab) {
  Rng rng(mix_seed(c.train.seed, kEmbeddingStream));
  if (c.embeddings.empty()) return corpus::random_embeddings(vocab, c.model.embedding_dim, rng).matrix;
  return corpus::load_embeddings(c.embeddings, vocab, c.model.embedding_dim, rng, c.allow_random_embeddings).matrix;
}

net::ModelConfig model_for(const RunConfig& c, const corpus::Vocabulary& vocab) {
  net::ModelConfig m = c.model;
  m.vocab_size = vocab.size();
  return m;
}

/// Parameters and vocabulary of a trained model.
struct Model {
  net::Parameters params;
  corpus::Vocabulary vocab;
};

Model load_model(const RunConfig& c, const std::string& command) {
  require(c.checkpoint, "checkpoint", command);
  const fs::path vocab_path = c.vocab.empty() ? fs::path(c.checkpoint).parent_path() / "vocab.json" : fs::path(c.vocab);
  Model m{net::load_checkpoint(c.checkpoint), corpus::Vocabulary::load(vocab_path)};
  if (m.vocab.size() != m.params.config.vocab_size) {
    throw FormatError("vocabulary " + vocab_path.string() + " has " + std::to_string(m.vocab.size()) +
                      " entries but the checkpoint expects " + std::to_string(m.params.config.vocab_size));
  }
  return m;
}

std::vector<corpus::Document> test_documents(const RunConfig& c, const Model& m, const std::string& command) {
  auto raw = read_corpus(c, command);
  if (c.hard) raw = corpus::hard_filter(raw);
  return m.vocab.encode(raw);
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  auto raw = read_corpus(c, "train");
  const corpus::Vocabulary vocab = corpus::build_vocab(raw, c.min_count);
  auto docs = vocab.encode(raw);

  std::vector<corpus::Document> train_docs = docs;
  std::vector<corpus::Document> dev_docs;
  if (c.dev_fraction > 0.0) {
    std::vector<std::string> ids;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      ids.push_back(docs[i].doc_id);
      index.emplace(docs[i].doc_id, i);
    }
    auto [train_ids, dev_ids] = corpus::holdout_split(ids, c.dev_fraction, mix_seed(c.train.seed, kDevStream));
    train_docs.clear();
    for (const auto& id : train_ids) train_docs.push_back(docs[index.at(id)]);
    for (const auto& id : dev_ids) dev_docs.push_back(docs[index.at(id)]);
  }

  const fs::path dir = output_dir(c);
  Rng init_rng(mix_seed(c.train.seed, kInitStream));
  net::Parameters init = net::init_params(model_for(c, vocab), init_rng, initial_embedding(c, vocab));
  train::TrainResult result = train::train(std::move(init), train_docs, c.train, dev_docs, [&](const auto& e) {
    out << "epoch " << e.epoch << " loss " << e.loss << " (pair " << e.pair_loss << ", aux " << e.aux_loss << ")";
    if (e.dev) out << " dev pair F1 " << e.dev->pair.f1;
    out << "\n";
  });

  net::save_checkpoint(dir / "checkpoint.bin", result.params);
  vocab.save(dir / "vocab.json");
  write_text(dir / "trainlog.jsonl", train::trainlog_jsonl(result.log));
  write_text(dir / "timing.jsonl", train::timing_jsonl(result.log));
  json metrics = {{"train", to_json(eval::evaluate(result.params, train_docs, eval_options(c)))}};
  if (!dev_docs.empty()) metrics["dev"] = to_json(eval::evaluate(result.params, dev_docs, eval_options(c)));
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  out << "wrote " << (dir / "checkpoint.bin").string() << "\n";
  return 0;
}

int cmd_xval(const RunConfig& c, std::ostream& out) {
  auto raw = read_corpus(c, "xval");
  const corpus::Vocabulary vocab = corpus::build_vocab(raw, c.min_count);
  auto docs = vocab.encode(raw);
  const fs::path dir = output_dir(c);

  eval::CrossValidationConfig xc;
  xc.folds = c.folds;
  xc.mode = c.split_mode;
  xc.seed = c.train.seed;
  xc.jobs = c.jobs;
  xc.model = model_for(c, vocab);
  xc.train = c.train;
  xc.eval = eval_options(c);
  xc.embedding = initial_embedding(c, vocab);
  eval::CrossValidationResult r = eval::cross_validate(docs, xc);

  json folds = json::array();
  std::string timing;
  for (const auto& f : r.folds) {
    json j = to_json(f.metrics);
    j["fold"] = f.fold;
    j["train_docs"] = f.train_docs;
    j["test_docs"] = f.test_docs;
    folds.push_back(j);
    timing += json{{"fold", f.fold}, {"mean_epoch_seconds", f.mean_epoch_seconds}}.dump() + "\n";
    out << "fold " << f.fold << " pair F1 " << f.metrics.pair.f1 << "\n";
  }
  write_text(dir / "metrics.json", json{{"folds", folds}, {"mean", to_json(r.mean)}}.dump(2) + "\n");
  write_text(dir / "timing.jsonl", timing);
  out << "mean pair P " << r.mean.pair.precision << " R " << r.mean.pair.recall << " F1 " << r.mean.pair.f1 << "\n";
  return 0;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const Model m = load_model(c, "eval");
  const auto docs = test_documents(c, m, "eval");
  const fs::path dir = output_dir(c);
  const eval::TaskMetrics t = eval::evaluate(m.params, docs, eval_options(c));
  json j = to_json(t);
  j["documents"] = docs.size();
  write_text(dir / "metrics.json", j.dump(2) + "\n");
  out << docs.size() << " documents\n";
  for (const auto& [name, mt] : {std::pair{"pair", t.pair}, {"emotion", t.emotion}, {"cause", t.cause}}) {
    out << name << " P " << mt.precision << " R " << mt.recall << " F1 " << mt.f1 << "\n";
  }
  return 0;
}

int cmd_predict(const RunConfig& c, std::ostream& out) {
  const Model m = load_model(c, "predict");
  const auto docs = test_documents(c, m, "predict");
  const fs::path dir = output_dir(c);
  std::string lines;
  for (const auto& p : eval::predict(m.params, docs, eval_options(c))) {
    json pairs = json::array();
    for (auto [e, cause] : p.pairs) pairs.push_back({e, cause});
    lines += json{{"doc_id", p.doc_id}, {"pairs", pairs}, {"emotions", p.emotions}, {"causes", p.causes}}.dump() + "\n";
  }
  write_text(dir / "predictions.jsonl", lines);
  out << "wrote " << (dir / "predictions.jsonl").string() << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  const Model m = load_model(c, "sweep");
  const auto docs = test_documents(c, m, "sweep");
  const fs::path dir = output_dir(c);
  const std::string csv = eval::sweep_csv(eval::threshold_sweep(m.params, docs, c.etas, eval_options(c)));
  write_text(dir / "sweep.csv", csv);
  out << csv;
  return 0;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  if (c.out.empty() || c.out == "." || fs::is_directory(c.out)) throw UsageError("synth: --out must name a file");
  if (c.n == 0) throw UsageError("synth: --n must be at least 1");
  const fs::path path(c.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  corpus::write_corpus(path, corpus::gen_synthetic(c.n, c.train.seed));
  out << "wrote " << c.n << " documents to " << path.string() << "\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Emotion-cause pair extraction"};
  app.name("ecpe");
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"train", "train on a corpus and write a checkpoint", cmd_train},
      {"xval", "k-fold cross-validation", cmd_xval},
      {"eval", "score a checkpoint on a corpus", cmd_eval},
      {"predict", "write extracted pairs, emotions and causes", cmd_predict},
      {"sweep", "pair metrics over several thresholds", cmd_sweep},
      {"synth", "write a synthetic corpus", cmd_synth},
  };

  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  std::vector<std::pair<std::string, std::vector<CLI::Option*>>> options;
  for (const Field& f : fields()) options.emplace_back(f.key, std::vector<CLI::Option*>{});
  for (const Command& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "key = value file applied before flags");
    std::size_t i = 0;
    for (const Field& f : fields()) {
      std::string names = "--" + f.key;
      if (f.key.find('_') != std::string::npos) {
        std::string dashed = f.key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        names += ",--" + dashed;
      }
      CLI::Option* opt = f.type == ValueType::boolean ? sub->add_flag(names, values[f.key], f.help)
                                                      : sub->add_option(names, values[f.key], f.help);
      options[i++].second.push_back(opt);
    }
    subs.emplace_back(sub, &cmd);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& [key, opts] : options) {
      for (CLI::Option* o : opts) {
        if (o->count() > 0) overrides.emplace_back(key, values[key]);
      }
    }
    std::optional<fs::path> file;
    if (!config_path.empty()) file = config_path;
    const RunConfig config = load_config(file, overrides);
    config.train.validate();
    for (const auto& [sub, cmd] : subs) {
      if (sub->parsed()) return cmd->run(config, out);
    }
    throw UsageError("no command given");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ecpe::cli
