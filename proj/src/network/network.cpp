#include "ecpe/network.hpp"

#include <cmath>
#include <cstdlib>

#include "ecpe/errors.hpp"

namespace ecpe::net {

namespace {

template <typename TensorRef, typename BindFn>
BoundParameters bind_with(TensorRef& params, BindFn bind_one) {
  BoundParameters b;
  b.embedding = bind_one(params.embedding);
  for (auto& c : params.convs) b.convs.push_back({c.width, bind_one(c.kernel), bind_one(c.bias)});
  b.lstm_forward = {bind_one(params.lstm_forward.w_ih), bind_one(params.lstm_forward.w_hh),
                    bind_one(params.lstm_forward.bias)};
  b.lstm_backward = {bind_one(params.lstm_backward.w_ih), bind_one(params.lstm_backward.w_hh),
                     bind_one(params.lstm_backward.bias)};
  auto lin = [&](auto& l) { return BoundLinear{bind_one(l.weight), bind_one(l.bias)}; };
  b.emotion = lin(params.emotion);
  b.cause = lin(params.cause);
  b.biaffine = lin(params.biaffine);
  b.aux_emotion = lin(params.aux_emotion);
  b.aux_cause = lin(params.aux_cause);
  b.aux_emotion_out = lin(params.aux_emotion_out);
  b.aux_cause_out = lin(params.aux_cause_out);
  b.hidden = params.config.hidden;
  return b;
}

ad::Var zeros(ad::Tape& tape, std::size_t n) { return tape.constant(ad::Tensor({n})); }

}  // namespace

BoundParameters bind(ad::Tape& tape, Parameters& params) {
  return bind_with(params, [&](ad::Tensor& t) { return tape.parameter(t); });
}

BoundParameters bind_view(ad::Tape& tape, const Parameters& params) {
  return bind_with(params, [&](const ad::Tensor& t) { return tape.view(t); });
}

ad::Var encode_clause(const BoundParameters& p, std::span<const std::int32_t> tokens, const ForwardOptions& opt) {
  if (tokens.empty()) throw DegenerateInputError("encode_clause: clause has no tokens");
  if (opt.training && opt.dropout > 0.0 && opt.rng == nullptr) {
    throw ContractError("encode_clause: dropout in training mode needs an rng");
  }
  Rng unused(0);
  Rng& rng = opt.rng ? *opt.rng : unused;
  ad::Var embedded = ad::gather_rows(p.embedding, tokens);
  embedded = ad::dropout(embedded, opt.dropout, opt.training, rng);
  std::vector<ad::Var> pooled;
  pooled.reserve(p.convs.size());
  for (const BoundConv& c : p.convs) {
    pooled.push_back(ad::max_over_time(ad::relu(ad::conv1d_same(embedded, c.kernel, c.bias))));
  }
  return ad::dropout(ad::concat(pooled), opt.dropout, opt.training, rng);
}

ad::Var encode_document(const BoundParameters& p, ad::Var clause_features) {
  const ad::Tensor& x = clause_features.value();
  if (x.rank() != 2) throw DimensionError("encode_document: expected [C×d] clause features");
  const std::size_t n = x.dim(0);
  ad::Tape& tape = *clause_features.tape;

  std::vector<ad::Var> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(ad::row(clause_features, i));

  std::vector<ad::Var> forward_states(n);
  std::vector<ad::Var> backward_states(n);
  ad::LstmState state{zeros(tape, p.hidden), zeros(tape, p.hidden)};
  for (std::size_t i = 0; i < n; ++i) {
    state = ad::lstm_step(rows[i], state, p.lstm_forward);
    forward_states[i] = state.h;
  }
  state = {zeros(tape, p.hidden), zeros(tape, p.hidden)};
  for (std::size_t i = n; i-- > 0;) {
    state = ad::lstm_step(rows[i], state, p.lstm_backward);
    backward_states[i] = state.h;
  }
  std::vector<ad::Var> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ad::Var both[2] = {forward_states[i], backward_states[i]};
    out.push_back(ad::concat(both));
  }
  return ad::stack_rows(out);
}

ad::Var project(const BoundParameters& p, ad::Var hidden, Head head) {
  const BoundLinear* l = nullptr;
  switch (head) {
    case Head::emotion: l = &p.emotion; break;
    case Head::cause: l = &p.cause; break;
    case Head::aux_emotion: l = &p.aux_emotion; break;
    case Head::aux_cause: l = &p.aux_cause; break;
  }
  return ad::relu(ad::linear(hidden, l->weight, l->bias));
}

ad::Var biaffine(ad::Var z_emotion, ad::Var z_cause, ad::Var weight, ad::Var bias) {
  return ad::matmul(ad::linear(z_emotion, weight, bias), ad::transpose(z_cause));
}

ad::Var activate_pairs(ad::Var m) { return ad::sigmoid(m); }

ad::Tensor position_weights(std::size_t length, double epsilon) {
  if (length == 0) throw DegenerateInputError("position_weights: document length must be positive");
  if (!(epsilon > 0.0)) throw ParameterError("position_weights: epsilon must be positive");
  ad::Tensor a({length, length});
  const double c = static_cast<double>(length);
  for (std::size_t p = 0; p < length; ++p) {
    for (std::size_t q = 0; q < length; ++q) {
      const double offset = std::abs(static_cast<double>(p) - static_cast<double>(q) - 1.0);
      a.at(p, q) = (c - offset + epsilon) / (c + epsilon);
    }
  }
  return a;
}

ad::Var apply_position_weights(ad::Var m_tilde, const ad::Tensor& weights) {
  if (m_tilde.shape() != weights.shape()) {
    throw DimensionError("apply_position_weights: " + ad::shape_string(m_tilde.shape()) + " vs " +
                         ad::shape_string(weights.shape()));
  }
  return ad::mul(m_tilde, m_tilde.tape->constant(weights));
}

ad::Var aux_head(ad::Var z_tilde, const BoundLinear& out) {
  return ad::softmax_rows(ad::linear(z_tilde, out.weight, out.bias));
}

DocumentGraph forward_document(const BoundParameters& p, std::span<const std::vector<std::int32_t>> clauses,
                               const ForwardOptions& opt) {
  if (clauses.empty()) throw DegenerateInputError("forward: document has no clauses");
  DocumentGraph g;
  g.length = clauses.size();
  std::vector<ad::Var> features;
  features.reserve(clauses.size());
  for (const auto& clause : clauses) features.push_back(encode_clause(p, clause, opt));
  g.clauses = ad::stack_rows(features);
  g.hidden = encode_document(p, g.clauses);
  g.z_emotion = project(p, g.hidden, Head::emotion);
  g.z_cause = project(p, g.hidden, Head::cause);
  g.m = biaffine(g.z_emotion, g.z_cause, p.biaffine.weight, p.biaffine.bias);
  g.m_tilde = activate_pairs(g.m);
  g.m_hat = opt.use_position ? apply_position_weights(g.m_tilde, position_weights(g.length, opt.epsilon)) : g.m_tilde;
  if (opt.aux_heads) {
    g.y_emotion = aux_head(project(p, g.hidden, Head::aux_emotion), p.aux_emotion_out);
    g.y_cause = aux_head(project(p, g.hidden, Head::aux_cause), p.aux_cause_out);
  }
  return g;
}

std::vector<DocumentGraph> forward(const BoundParameters& p, const corpus::Batch& batch, const ForwardOptions& opt) {
  std::vector<DocumentGraph> graphs;
  graphs.reserve(batch.size);
  for (std::size_t b = 0; b < batch.size; ++b) {
    std::vector<std::vector<std::int32_t>> clauses;
    clauses.reserve(batch.lengths[b]);
    for (std::size_t c = 0; c < batch.lengths[b]; ++c) clauses.push_back(batch.clause_tokens(b, c));
    graphs.push_back(forward_document(p, clauses, opt));
  }
  return graphs;
}

ForwardOutputs snapshot(const DocumentGraph& g) {
  ForwardOutputs out{g.clauses.value(), g.hidden.value(), g.z_emotion.value(), g.z_cause.value(),
                     g.m.value(),       g.m_tilde.value(), g.m_hat.value(),   {},
                     {}};
  if (g.y_emotion) out.y_emotion = g.y_emotion->value();
  if (g.y_cause) out.y_cause = g.y_cause->value();
  // Snapshots carry values only.
  for (ad::Tensor* t : {&out.clauses, &out.hidden, &out.z_emotion, &out.z_cause, &out.m, &out.m_tilde, &out.m_hat,
                        &out.y_emotion, &out.y_cause}) {
    if (t->requires_grad()) t->set_requires_grad(false);
  }
  return out;
}

ForwardOutputs infer(const Parameters& params, const corpus::Document& doc, double epsilon, bool use_position) {
  ad::Tape tape;
  BoundParameters p = bind_view(tape, params);
  ForwardOptions opt;
  opt.epsilon = epsilon;
  opt.use_position = use_position;
  return snapshot(forward_document(p, doc.clauses, opt));
}

}  // namespace ecpe::net
