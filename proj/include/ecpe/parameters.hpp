#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ecpe/adam.hpp"
#include "ecpe/rng.hpp"
#include "ecpe/tensor.hpp"

namespace ecpe::net {

/// Layer sizes. Defaults: d_e = 200, kernels {2,3,4,5} with d_c = 50 filters
/// each, d_h = 300 per LSTM direction, d_z = 100.
struct ModelConfig {
  std::size_t vocab_size = 2;
  std::size_t embedding_dim = 200;
  std::vector<std::size_t> kernel_sizes{2, 3, 4, 5};
  std::size_t filters = 50;
  std::size_t hidden = 300;
  std::size_t projection = 100;

  std::size_t clause_dim() const { return kernel_sizes.size() * filters; }
  bool operator==(const ModelConfig&) const = default;
};

/// weight [out×in] applied as W·x + b.
struct Linear {
  ad::Tensor weight;
  ad::Tensor bias;
};

struct ConvLayer {
  std::size_t width = 0;
  ad::Tensor kernel;  // [width × d_e × d_c]
  ad::Tensor bias;    // [d_c]
};

/// One LSTM direction, gate blocks stacked input, forget, cell, output.
struct LstmWeights {
  ad::Tensor w_ih;  // [4h × in]
  ad::Tensor w_hh;  // [4h × h]
  ad::Tensor bias;  // [4h]
};

/// Every trainable tensor of the model.
struct Parameters {
  ModelConfig config;
  ad::Tensor embedding;
  std::vector<ConvLayer> convs;
  LstmWeights lstm_forward;
  LstmWeights lstm_backward;
  Linear emotion;           // W^e, b^e
  Linear cause;             // W^c, b^c
  Linear biaffine;          // W^m, b^m
  Linear aux_emotion;       // W̃^e, b̃^e
  Linear aux_cause;         // W̃^c, b̃^c
  Linear aux_emotion_out;   // Ŵ^e, b̂^e
  Linear aux_cause_out;     // Ŵ^c, b̂^c

  /// Stable-ordered named view; the embedding's PAD row is frozen.
  std::vector<ad::NamedParameter> named();
  std::size_t scalar_count() const;
};

/// Weights ~ uniform(±√(6/fan_in)); biases zero except the LSTM forget-gate
/// block, which starts at 1. Uses `embedding` when given (its shape must be
/// [vocab_size × embedding_dim]), otherwise uniform(−0.1, 0.1) rows.
Parameters init_params(const ModelConfig& config, Rng& rng, std::optional<ad::Tensor> embedding = std::nullopt);

/// Infers sizes from a named tensor list and rebuilds the parameter set.
/// Throws FormatError on missing or inconsistent tensors.
Parameters from_named_tensors(std::vector<std::pair<std::string, ad::Tensor>> tensors);

}  // namespace ecpe::net
