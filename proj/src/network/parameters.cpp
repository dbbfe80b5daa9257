#include "ecpe/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ecpe/errors.hpp"

namespace ecpe::net {

namespace {

ad::Tensor he_uniform(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  ad::Tensor t(std::move(shape));
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  t.set_requires_grad(true);
  return t;
}

ad::Tensor zeros(ad::Shape shape) {
  ad::Tensor t(std::move(shape));
  t.set_requires_grad(true);
  return t;
}

Linear make_linear(std::size_t out, std::size_t in, Rng& rng) { return {he_uniform({out, in}, in, rng), zeros({out})}; }

LstmWeights make_lstm(std::size_t in, std::size_t hidden, Rng& rng) {
  LstmWeights w{he_uniform({4 * hidden, in}, in, rng), he_uniform({4 * hidden, hidden}, hidden, rng),
                zeros({4 * hidden})};
  for (std::size_t i = hidden; i < 2 * hidden; ++i) w.bias[i] = 1.0;
  return w;
}

void push_linear(std::vector<ad::NamedParameter>& out, const std::string& name, Linear& l) {
  out.push_back({name + ".weight", &l.weight, 0});
  out.push_back({name + ".bias", &l.bias, 0});
}

void push_lstm(std::vector<ad::NamedParameter>& out, const std::string& name, LstmWeights& w) {
  out.push_back({name + ".w_ih", &w.w_ih, 0});
  out.push_back({name + ".w_hh", &w.w_hh, 0});
  out.push_back({name + ".bias", &w.bias, 0});
}

}  // namespace

std::vector<ad::NamedParameter> Parameters::named() {
  std::vector<ad::NamedParameter> out;
  out.push_back({"embedding", &embedding, 1});
  for (ConvLayer& c : convs) {
    const std::string base = "conv.k" + std::to_string(c.width);
    out.push_back({base + ".kernel", &c.kernel, 0});
    out.push_back({base + ".bias", &c.bias, 0});
  }
  push_lstm(out, "lstm.forward", lstm_forward);
  push_lstm(out, "lstm.backward", lstm_backward);
  push_linear(out, "emotion", emotion);
  push_linear(out, "cause", cause);
  push_linear(out, "biaffine", biaffine);
  push_linear(out, "aux_emotion", aux_emotion);
  push_linear(out, "aux_cause", aux_cause);
  push_linear(out, "aux_emotion_out", aux_emotion_out);
  push_linear(out, "aux_cause_out", aux_cause_out);
  return out;
}

std::size_t Parameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : const_cast<Parameters*>(this)->named()) n += p.tensor->size();
  return n;
}

Parameters init_params(const ModelConfig& config, Rng& rng, std::optional<ad::Tensor> embedding) {
  if (config.vocab_size < 2 || config.embedding_dim == 0 || config.kernel_sizes.empty() || config.filters == 0 ||
      config.hidden == 0 || config.projection == 0) {
    throw ParameterError("init_params: every layer size must be positive");
  }
  Parameters p;
  p.config = config;
  if (embedding) {
    if (embedding->shape() != ad::Shape{config.vocab_size, config.embedding_dim}) {
      throw DimensionError("init_params: embedding table " + ad::shape_string(embedding->shape()) +
                           " does not match the configured vocabulary and dimension");
    }
    p.embedding = std::move(*embedding);
  } else {
    p.embedding = ad::Tensor({config.vocab_size, config.embedding_dim});
    auto v = p.embedding.values();
    for (std::size_t i = config.embedding_dim; i < v.size(); ++i) v[i] = rng.uniform(-0.1, 0.1);
  }
  for (std::size_t k = 0; k < config.embedding_dim; ++k) p.embedding[k] = 0.0;
  p.embedding.set_requires_grad(true);

  for (std::size_t width : config.kernel_sizes) {
    if (width == 0) throw ParameterError("init_params: kernel width must be positive");
    p.convs.push_back({width, he_uniform({width, config.embedding_dim, config.filters}, width * config.embedding_dim, rng),
                       zeros({config.filters})});
  }
  const std::size_t d_in = config.clause_dim();
  const std::size_t h2 = 2 * config.hidden;
  const std::size_t z = config.projection;
  p.lstm_forward = make_lstm(d_in, config.hidden, rng);
  p.lstm_backward = make_lstm(d_in, config.hidden, rng);
  p.emotion = make_linear(z, h2, rng);
  p.cause = make_linear(z, h2, rng);
  p.biaffine = make_linear(z, z, rng);
  p.aux_emotion = make_linear(z, h2, rng);
  p.aux_cause = make_linear(z, h2, rng);
  p.aux_emotion_out = make_linear(2, z, rng);
  p.aux_cause_out = make_linear(2, z, rng);
  return p;
}

Parameters from_named_tensors(std::vector<std::pair<std::string, ad::Tensor>> tensors) {
  std::map<std::string, ad::Tensor> by_name;
  for (auto& [name, t] : tensors) {
    if (!by_name.emplace(name, std::move(t)).second) throw FormatError("checkpoint: duplicate tensor '" + name + "'");
  }
  auto take = [&](const std::string& name) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("checkpoint: missing tensor '" + name + "'");
    ad::Tensor t = std::move(it->second);
    by_name.erase(it);
    return t;
  };

  ModelConfig config;
  ad::Tensor embedding = take("embedding");
  if (embedding.rank() != 2) throw FormatError("checkpoint: embedding must be a matrix");
  config.vocab_size = embedding.dim(0);
  config.embedding_dim = embedding.dim(1);

  std::vector<std::size_t> widths;
  for (const auto& [name, t] : by_name) {
    if (name.rfind("conv.k", 0) == 0 && name.size() > 7 && name.ends_with(".kernel")) {
      const std::string digits = name.substr(6, name.size() - 6 - 7);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 4) {
        throw FormatError("checkpoint: bad convolution tensor name '" + name + "'");
      }
      widths.push_back(std::stoul(digits));
    }
  }
  if (widths.empty()) throw FormatError("checkpoint: no convolution kernels");
  ad::Tensor probe = by_name.at("conv.k" + std::to_string(widths.front()) + ".kernel");
  if (probe.rank() != 3) throw FormatError("checkpoint: convolution kernels must have rank 3");
  config.filters = probe.dim(2);
  ad::Tensor w_hh = by_name.count("lstm.forward.w_hh") ? by_name.at("lstm.forward.w_hh") : ad::Tensor();
  if (w_hh.rank() != 2) throw FormatError("checkpoint: missing or malformed tensor 'lstm.forward.w_hh'");
  config.hidden = w_hh.dim(1);
  ad::Tensor wm = by_name.count("biaffine.weight") ? by_name.at("biaffine.weight") : ad::Tensor();
  if (wm.rank() != 2) throw FormatError("checkpoint: missing or malformed tensor 'biaffine.weight'");
  config.projection = wm.dim(0);

  // Build a reference parameter set for the inferred sizes and require every
  // tensor to match it exactly, in name and shape.
  // Kernel order follows the numeric order of widths as stored.
  std::sort(widths.begin(), widths.end());
  config.kernel_sizes = widths;
  Rng unused(0);
  Parameters p = init_params(config, unused);
  p.embedding = std::move(embedding);
  p.embedding.set_requires_grad(true);
  for (ad::NamedParameter& np : p.named()) {
    if (np.name == "embedding") continue;
    ad::Tensor t = take(np.name);
    if (t.shape() != np.tensor->shape()) {
      throw FormatError("checkpoint: tensor '" + np.name + "' has shape " + ad::shape_string(t.shape()) +
                        ", expected " + ad::shape_string(np.tensor->shape()));
    }
    *np.tensor = std::move(t);
    np.tensor->set_requires_grad(true);
  }
  if (!by_name.empty()) throw FormatError("checkpoint: unexpected tensor '" + by_name.begin()->first + "'");
  return p;
}

}  // namespace ecpe::net
