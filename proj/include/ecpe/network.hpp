#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ecpe/batch.hpp"
#include "ecpe/ops.hpp"
#include "ecpe/parameters.hpp"

namespace ecpe::net {

struct AblationFlags {
  bool use_position = true;
  bool use_aux = true;
  bool operator==(const AblationFlags&) const = default;
};

struct ForwardOptions {
  bool training = false;
  double dropout = 0.0;
  double epsilon = 1.0;
  bool use_position = true;
  /// Build the auxiliary heads. Training turns this off when the auxiliary
  /// loss is disabled; evaluation always needs them.
  bool aux_heads = true;
  /// Required when training with dropout > 0.
  Rng* rng = nullptr;
};

struct BoundLinear {
  ad::Var weight;
  ad::Var bias;
};

struct BoundConv {
  std::size_t width = 0;
  ad::Var kernel;
  ad::Var bias;
};

/// Parameters registered on one tape.
struct BoundParameters {
  ad::Var embedding;
  std::vector<BoundConv> convs;
  ad::LstmCell lstm_forward;
  ad::LstmCell lstm_backward;
  BoundLinear emotion, cause, biaffine;
  BoundLinear aux_emotion, aux_cause, aux_emotion_out, aux_cause_out;
  std::size_t hidden = 0;
};

/// Gradients land in the parameters' grad() buffers after backward().
BoundParameters bind(ad::Tape& tape, Parameters& params);
/// Read-only binding for inference; nothing receives a gradient.
BoundParameters bind_view(ad::Tape& tape, const Parameters& params);

/// Convolutions over one clause's tokens, ReLU, max-over-time pooling,
/// concatenated in kernel order -> [kernels·d_c].
ad::Var encode_clause(const BoundParameters& p, std::span<const std::int32_t> tokens, const ForwardOptions& opt);

/// BiLSTM over the rows of clause features [C×d] -> [C×2d_h], forward state
/// first.
ad::Var encode_document(const BoundParameters& p, ad::Var clause_features);

enum class Head { emotion, cause, aux_emotion, aux_cause };

/// ReLU(h·Wᵀ + b) with the head's own weights -> [C×d_z].
ad::Var project(const BoundParameters& p, ad::Var hidden, Head head);

/// M[p][q] = (W^m z^e_p + b^m)ᵀ z^c_q. Rows are emotion clauses.
ad::Var biaffine(ad::Var z_emotion, ad::Var z_cause, ad::Var weight, ad::Var bias);

ad::Var activate_pairs(ad::Var m);

/// A[p][q] = (C − |p − q − 1| + ε) / (C + ε).
ad::Tensor position_weights(std::size_t length, double epsilon);

/// M̃ ⊙ A with A recorded as a constant.
ad::Var apply_position_weights(ad::Var m_tilde, const ad::Tensor& weights);

/// softmax(z̃·Ŵᵀ + b̂) -> [C×2], columns (negative, positive).
ad::Var aux_head(ad::Var z_tilde, const BoundLinear& out);

/// Tape handles for one document's forward pass.
struct DocumentGraph {
  std::size_t length = 0;
  ad::Var clauses;
  ad::Var hidden;
  ad::Var z_emotion;
  ad::Var z_cause;
  ad::Var m;
  ad::Var m_tilde;
  ad::Var m_hat;
  std::optional<ad::Var> y_emotion;
  std::optional<ad::Var> y_cause;
};

DocumentGraph forward_document(const BoundParameters& p, std::span<const std::vector<std::int32_t>> clauses,
                               const ForwardOptions& opt);

/// One graph per batch document, each sized to that document's true length.
std::vector<DocumentGraph> forward(const BoundParameters& p, const corpus::Batch& batch, const ForwardOptions& opt);

/// Detached values of a document graph. The auxiliary tensors are empty when
/// the heads were not built.
struct ForwardOutputs {
  ad::Tensor clauses;
  ad::Tensor hidden;
  ad::Tensor z_emotion;
  ad::Tensor z_cause;
  ad::Tensor m;
  ad::Tensor m_tilde;
  ad::Tensor m_hat;
  ad::Tensor y_emotion;
  ad::Tensor y_cause;
};

ForwardOutputs snapshot(const DocumentGraph& graph);

/// Eval-mode forward pass of one document on a private tape.
ForwardOutputs infer(const Parameters& params, const corpus::Document& doc, double epsilon = 1.0,
                     bool use_position = true);

}  // namespace ecpe::net
