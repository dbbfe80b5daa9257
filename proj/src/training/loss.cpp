#include "ecpe/loss.hpp"

#include <algorithm>
#include <cmath>

#include "ecpe/errors.hpp"

namespace ecpe::train {

ad::Var pair_loss(ad::Var m_hat, std::span<const std::uint8_t> targets, std::span<const std::uint8_t> mask,
                  std::size_t* clamped) {
  const ad::Tensor& m = m_hat.value();
  if (m.rank() != 2 || m.dim(0) != m.dim(1) || targets.size() != m.size() || mask.size() != m.dim(0)) {
    throw DimensionError("pair_loss: M̂ " + ad::shape_string(m.shape()) + " does not match targets/mask");
  }
  const std::size_t n = m.dim(0);
  double loss = 0.0;
  std::vector<double> dloss(m.size(), 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    if (!mask[p]) continue;
    for (std::size_t q = 0; q < n; ++q) {
      if (!mask[q]) continue;
      const std::size_t i = p * n + q;
      const double arg = targets[i] ? m[i] : 1.0 - m[i];
      if (arg < kLogFloor) {
        loss -= std::log(kLogFloor);
        if (clamped) ++*clamped;
        continue;
      }
      loss -= std::log(arg);
      dloss[i] = targets[i] ? -1.0 / m[i] : 1.0 / (1.0 - m[i]);
    }
  }
  return m_hat.tape->record("pair_loss", ad::Tensor::scalar(loss), {m_hat},
                            [mi = m_hat.id, dloss = std::move(dloss)](ad::Tape& t, std::size_t self) {
                              const double g = t.grad(self)[0];
                              auto dm = t.grad_buffer(mi);
                              for (std::size_t i = 0; i < dloss.size(); ++i) dm[i] += g * dloss[i];
                            });
}

namespace {

void nll(const ad::Tensor& y, std::span<const std::uint8_t> labels, std::span<const std::uint8_t> mask, double& loss,
         std::vector<double>& d) {
  if (y.rank() != 2 || y.dim(1) != 2 || labels.size() != y.dim(0) || mask.size() != y.dim(0)) {
    throw DimensionError("aux_loss: distribution " + ad::shape_string(y.shape()) + " does not match labels/mask");
  }
  d.assign(y.size(), 0.0);
  for (std::size_t i = 0; i < y.dim(0); ++i) {
    if (!mask[i]) continue;
    const std::size_t k = i * 2 + (labels[i] ? 1 : 0);
    if (y[k] < kLogFloor) {
      loss -= std::log(kLogFloor);
      continue;
    }
    loss -= std::log(y[k]);
    d[k] = -1.0 / y[k];
  }
}

}  // namespace

ad::Var aux_loss(ad::Var y_emotion, ad::Var y_cause, std::span<const std::uint8_t> emotion_labels,
                 std::span<const std::uint8_t> cause_labels, std::span<const std::uint8_t> mask) {
  double loss = 0.0;
  std::vector<double> de;
  std::vector<double> dc;
  nll(y_emotion.value(), emotion_labels, mask, loss, de);
  nll(y_cause.value(), cause_labels, mask, loss, dc);
  return y_emotion.tape->record(
      "aux_loss", ad::Tensor::scalar(loss), {y_emotion, y_cause},
      [ei = y_emotion.id, ci = y_cause.id, de = std::move(de), dc = std::move(dc)](ad::Tape& t, std::size_t self) {
        const double g = t.grad(self)[0];
        auto ge = t.grad_buffer(ei);
        for (std::size_t i = 0; i < ge.size(); ++i) ge[i] += g * de[i];
        auto gc = t.grad_buffer(ci);
        for (std::size_t i = 0; i < gc.size(); ++i) gc[i] += g * dc[i];
      });
}

ad::Var l2_penalty(std::span<const ad::Var> params, std::span<const std::size_t> frozen_rows) {
  if (params.empty() || params.size() != frozen_rows.size()) {
    throw ContractError("l2_penalty: need one frozen-row count per parameter");
  }
  ad::Var total = ad::sum_squares(params[0], frozen_rows[0]);
  for (std::size_t i = 1; i < params.size(); ++i) total = ad::add(total, ad::sum_squares(params[i], frozen_rows[i]));
  return total;
}

ad::Var total_loss(ad::Var pair, std::optional<ad::Var> aux, std::optional<ad::Var> penalty, double beta,
                   double lambda) {
  ad::Var total = pair;
  if (aux && beta != 0.0) total = ad::add(total, ad::scale(*aux, beta));
  if (penalty && lambda != 0.0) total = ad::add(total, ad::scale(*penalty, lambda));
  return total;
}

DocumentTargets document_targets(const corpus::Batch& batch, std::size_t b) {
  const std::size_t n = batch.lengths.at(b);
  DocumentTargets t;
  t.pairs.resize(n * n);
  t.emotions.resize(n);
  t.causes.resize(n);
  t.mask.assign(n, 1);
  for (std::size_t p = 0; p < n; ++p) {
    t.emotions[p] = batch.emotion_labels[batch.clause_index(b, p)];
    t.causes[p] = batch.cause_labels[batch.clause_index(b, p)];
    for (std::size_t q = 0; q < n; ++q) t.pairs[p * n + q] = batch.pair_labels[batch.pair_index(b, p, q)];
  }
  return t;
}

std::vector<ad::Var> bound_list(const net::BoundParameters& b) {
  std::vector<ad::Var> out{b.embedding};
  for (const auto& c : b.convs) {
    out.push_back(c.kernel);
    out.push_back(c.bias);
  }
  for (const ad::LstmCell* cell : {&b.lstm_forward, &b.lstm_backward}) {
    out.push_back(cell->w_ih);
    out.push_back(cell->w_hh);
    out.push_back(cell->bias);
  }
  for (const net::BoundLinear* l : {&b.emotion, &b.cause, &b.biaffine, &b.aux_emotion, &b.aux_cause,
                                    &b.aux_emotion_out, &b.aux_cause_out}) {
    out.push_back(l->weight);
    out.push_back(l->bias);
  }
  return out;
}

LossTerms batch_loss(const std::vector<net::DocumentGraph>& graphs, const corpus::Batch& batch,
                     const net::BoundParameters& bound, double beta, double lambda) {
  if (graphs.empty() || graphs.size() != batch.size) throw ContractError("batch_loss: one graph per document");
  LossTerms terms;
  std::optional<ad::Var> pair_sum;
  std::optional<ad::Var> aux_sum;
  const bool with_aux = beta != 0.0 && graphs.front().y_emotion.has_value();
  for (std::size_t b = 0; b < graphs.size(); ++b) {
    DocumentTargets t = document_targets(batch, b);
    ad::Var lp = pair_loss(graphs[b].m_hat, t.pairs, t.mask, &terms.clamped);
    pair_sum = pair_sum ? ad::add(*pair_sum, lp) : lp;
    if (with_aux) {
      ad::Var la = aux_loss(*graphs[b].y_emotion, *graphs[b].y_cause, t.emotions, t.causes, t.mask);
      aux_sum = aux_sum ? ad::add(*aux_sum, la) : la;
    }
  }
  std::optional<ad::Var> penalty;
  if (lambda != 0.0) {
    std::vector<ad::Var> params = bound_list(bound);
    std::vector<std::size_t> frozen(params.size(), 0);
    frozen[0] = 1;  // PAD row
    penalty = l2_penalty(params, frozen);
    terms.penalty = penalty->value()[0];
  }
  terms.pair = pair_sum->value()[0];
  terms.aux = aux_sum ? aux_sum->value()[0] : 0.0;
  terms.total = total_loss(*pair_sum, aux_sum, penalty, beta, lambda);
  return terms;
}

}  // namespace ecpe::train
