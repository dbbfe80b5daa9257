#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecpe/folds.hpp"
#include "ecpe/metrics.hpp"
#include "ecpe/network.hpp"
#include "ecpe/trainer.hpp"

namespace ecpe::cli {

/// Everything a command can be configured with. Model and training defaults
/// are the published settings.
struct RunConfig {
  std::string corpus;
  std::string embeddings;
  std::string checkpoint;
  std::string vocab;
  std::string out = ".";

  net::ModelConfig model;
  train::TrainConfig train;
  double dev_fraction = 0.0;
  std::size_t min_count = 1;
  bool allow_random_embeddings = true;
  std::size_t max_clauses = 75;

  std::size_t folds = 10;
  corpus::SplitMode split_mode = corpus::SplitMode::within_fold;
  std::size_t jobs = 1;

  std::vector<double> etas{0.2, 0.3, 0.4, 0.5, 0.6};
  bool hard = false;
  eval::Averaging averaging = eval::Averaging::micro;

  std::size_t n = 100;
};

enum class ValueType { integer, real, boolean, text, integer_list, real_list, choice };

/// One configurable key. `set` parses text into the config and throws
/// ConfigError naming the key and expected type; `get` renders the current
/// value so that set(get()) is the identity.
struct Field {
  std::string key;
  ValueType type;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

/// The single key registry shared by config files and flags.
const std::vector<Field>& fields();
const Field* find_field(const std::string& key);

std::string type_name(ValueType type);

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

/// Defaults, then the file (if any), then overrides, each applied in order.
/// Unknown keys and malformed values throw ConfigError.
RunConfig load_config(const std::optional<std::filesystem::path>& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

/// Every key with its resolved value, one `key = value` line each, in
/// registry order.
std::string render_config(const RunConfig& config);

}  // namespace ecpe::cli
