#include "ecpe/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ecpe/errors.hpp"

namespace ecpe::cli {

namespace {

[[noreturn]] void bad_value(const std::string& key, ValueType type, const std::string& text) {
  throw ConfigError("key '" + key + "': expected " + type_name(type) + ", got '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::size_t parse_size(const std::string& key, const std::string& text, ValueType type = ValueType::integer) {
  const std::string t = trim(text);
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size()) bad_value(key, type, text);
  return v;
}

double parse_real(const std::string& key, const std::string& text, ValueType type = ValueType::real) {
  const std::string t = trim(text);
  if (t.empty()) bad_value(key, type, text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) bad_value(key, type, text);
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return false;
  bad_value(key, ValueType::boolean, text);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(item);
  return items;
}

std::string real_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items, std::string (*render)(T)) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + render(items[i]);
  return out;
}

std::string size_text(std::size_t v) { return std::to_string(v); }

Field text_field(std::string key, std::string help, std::string RunConfig::*member) {
  return {key, ValueType::text, std::move(help), [member](RunConfig& c, const std::string& v) { c.*member = trim(v); },
          [member](const RunConfig& c) { return c.*member; }};
}

template <typename Get>
Field size_field(std::string key, std::string help, Get access) {
  return {key, ValueType::integer, std::move(help),
          [key, access](RunConfig& c, const std::string& v) { access(c) = parse_size(key, v); },
          [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field real_field(std::string key, std::string help, Get access) {
  return {key, ValueType::real, std::move(help),
          [key, access](RunConfig& c, const std::string& v) { access(c) = parse_real(key, v); },
          [access](const RunConfig& c) { return real_text(access(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field bool_field(std::string key, std::string help, Get access) {
  return {key, ValueType::boolean, std::move(help),
          [key, access](RunConfig& c, const std::string& v) { access(c) = parse_bool(key, v); },
          [access](const RunConfig& c) { return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

std::vector<Field> make_fields() {
  std::vector<Field> f;
  f.push_back(text_field("corpus", "corpus JSONL file", &RunConfig::corpus));
  f.push_back(text_field("embeddings", "word2vec text vectors (optional)", &RunConfig::embeddings));
  f.push_back(text_field("checkpoint", "model checkpoint to read", &RunConfig::checkpoint));
  f.push_back(text_field("vocab", "vocabulary file (default: vocab.json beside the checkpoint)", &RunConfig::vocab));
  f.push_back(text_field("out", "output directory (synth: output file)", &RunConfig::out));

  f.push_back(size_field("embedding_dim", "word embedding size d_e", [](RunConfig& c) -> auto& { return c.model.embedding_dim; }));
  f.push_back({"kernel_sizes", ValueType::integer_list, "convolution widths, comma separated",
               [](RunConfig& c, const std::string& v) {
                 std::vector<std::size_t> sizes;
                 for (const auto& item : split_list(v)) sizes.push_back(parse_size("kernel_sizes", item, ValueType::integer_list));
                 if (sizes.empty()) bad_value("kernel_sizes", ValueType::integer_list, v);
                 c.model.kernel_sizes = sizes;
               },
               [](const RunConfig& c) { return join<std::size_t>(c.model.kernel_sizes, size_text); }});
  f.push_back(size_field("filters", "filters per kernel d_c", [](RunConfig& c) -> auto& { return c.model.filters; }));
  f.push_back(size_field("hidden", "LSTM units per direction d_h", [](RunConfig& c) -> auto& { return c.model.hidden; }));
  f.push_back(size_field("projection", "projection size d_z", [](RunConfig& c) -> auto& { return c.model.projection; }));

  f.push_back(size_field("batch_size", "documents per batch", [](RunConfig& c) -> auto& { return c.train.batch_size; }));
  f.push_back(real_field("learning_rate", "Adam learning rate", [](RunConfig& c) -> auto& { return c.train.learning_rate; }));
  f.push_back(real_field("lambda_l2", "L2 penalty weight", [](RunConfig& c) -> auto& { return c.train.lambda_l2; }));
  f.push_back(real_field("beta_aux", "auxiliary loss weight", [](RunConfig& c) -> auto& { return c.train.beta_aux; }));
  f.push_back(real_field("dropout", "dropout rate", [](RunConfig& c) -> auto& { return c.train.dropout; }));
  f.push_back(size_field("epochs", "training epochs", [](RunConfig& c) -> auto& { return c.train.epochs; }));
  f.push_back({"seed", ValueType::integer, "random seed",
               [](RunConfig& c, const std::string& v) { c.train.seed = parse_size("seed", v); },
               [](const RunConfig& c) { return std::to_string(c.train.seed); }});
  f.push_back(real_field("epsilon", "position weight smoothing", [](RunConfig& c) -> auto& { return c.train.epsilon; }));
  f.push_back(real_field("eta", "pair decision threshold", [](RunConfig& c) -> auto& { return c.train.eta; }));
  f.push_back(bool_field("use_position", "apply position weights", [](RunConfig& c) -> auto& { return c.train.ablation.use_position; }));
  f.push_back(bool_field("use_aux", "train the auxiliary tasks", [](RunConfig& c) -> auto& { return c.train.ablation.use_aux; }));
  f.push_back(real_field("dev_fraction", "held-out share for model selection (train)", [](RunConfig& c) -> auto& { return c.dev_fraction; }));
  f.push_back(size_field("min_count", "vocabulary frequency cutoff", [](RunConfig& c) -> auto& { return c.min_count; }));
  f.push_back(bool_field("allow_random_embeddings", "fall back to random vectors when the embedding file is missing",
                         [](RunConfig& c) -> auto& { return c.allow_random_embeddings; }));
  f.push_back(size_field("max_clauses", "longest accepted document", [](RunConfig& c) -> auto& { return c.max_clauses; }));

  f.push_back(size_field("folds", "cross-validation folds", [](RunConfig& c) -> auto& { return c.folds; }));
  f.push_back({"split_mode", ValueType::choice, "within_fold or standard",
               [](RunConfig& c, const std::string& v) {
                 try {
                   c.split_mode = corpus::parse_split_mode(trim(v));
                 } catch (const Error&) {
                   throw ConfigError("key 'split_mode': expected one of within_fold, standard, got '" + v + "'");
                 }
               },
               [](const RunConfig& c) { return corpus::to_string(c.split_mode); }});
  f.push_back(size_field("jobs", "parallel folds", [](RunConfig& c) -> auto& { return c.jobs; }));

  f.push_back({"etas", ValueType::real_list, "sweep thresholds, comma separated",
               [](RunConfig& c, const std::string& v) {
                 std::vector<double> etas;
                 for (const auto& item : split_list(v)) etas.push_back(parse_real("etas", item, ValueType::real_list));
                 if (etas.empty()) bad_value("etas", ValueType::real_list, v);
                 c.etas = etas;
               },
               [](const RunConfig& c) { return join<double>(c.etas, real_text); }});
  f.push_back(bool_field("hard", "keep only single-pair documents", [](RunConfig& c) -> auto& { return c.hard; }));
  f.push_back({"averaging", ValueType::choice, "micro or macro",
               [](RunConfig& c, const std::string& v) {
                 const std::string t = trim(v);
                 if (t == "micro") {
                   c.averaging = eval::Averaging::micro;
                 } else if (t == "macro") {
                   c.averaging = eval::Averaging::macro;
                 } else {
                   throw ConfigError("key 'averaging': expected one of micro, macro, got '" + v + "'");
                 }
               },
               [](const RunConfig& c) { return std::string(c.averaging == eval::Averaging::micro ? "micro" : "macro"); }});
  f.push_back(size_field("n", "documents to generate (synth)", [](RunConfig& c) -> auto& { return c.n; }));
  return f;
}

}  // namespace

std::string type_name(ValueType type) {
  switch (type) {
    case ValueType::integer: return "a non-negative integer";
    case ValueType::real: return "a real number";
    case ValueType::boolean: return "a boolean (true/false)";
    case ValueType::text: return "text";
    case ValueType::integer_list: return "a comma-separated list of non-negative integers";
    case ValueType::real_list: return "a comma-separated list of real numbers";
    case ValueType::choice: return "one of the listed choices";
  }
  return "value";
}

const std::vector<Field>& fields() {
  static const std::vector<Field> registry = make_fields();
  return registry;
}

const Field* find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

RunConfig load_config(const std::optional<std::filesystem::path>& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig config;
  auto apply = [&](const std::vector<std::pair<std::string, std::string>>& entries) {
    for (const auto& [key, value] : entries) {
      const Field* f = find_field(key);
      if (!f) throw ConfigError("unknown key '" + key + "'");
      f->set(config, value);
    }
  };
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file " + path->string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      apply(parse_config_text(buf.str()));
    } catch (const ConfigError& e) {
      throw ConfigError(path->string() + ": " + e.what());
    }
  }
  apply(overrides);
  return config;
}

std::string render_config(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

}  // namespace ecpe::cli
