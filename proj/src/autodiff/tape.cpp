#include "ecpe/tape.hpp"

#include <algorithm>

#include "ecpe/errors.hpp"

namespace ecpe::ad {

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
  Node node;
  node.op = "constant";
  node.owned = std::move(value);
  node.owned.set_requires_grad(false);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
  Node node;
  node.op = "variable";
  node.owned = std::move(value);
  node.owned.set_requires_grad(false);
  node.needs_grad = true;
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Tensor& param) {
  Node node;
  node.op = "parameter";
  node.external = &param;
  node.needs_grad = param.requires_grad();
  if (node.needs_grad) node.grad_target = &param;
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::view(const Tensor& value) {
  Node node;
  node.op = "view";
  node.external = &value;
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node node;
  node.op = op;
  node.owned = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& v : inputs) {
    if (v.tape != this) throw ContractError(std::string(op) + ": input belongs to another tape");
    node.inputs.push_back(v.id);
    node.needs_grad = node.needs_grad || nodes_[v.id].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& node = nodes_.at(id);
  return node.external ? *node.external : node.owned;
}

std::span<const double> Tape::grad(std::size_t id) const {
  const Node& node = nodes_.at(id);
  if (node.grad_target) return node.grad_target->grad();
  return node.grad;
}

std::span<double> Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_.at(id);
  if (!node.needs_grad) return {};
  if (node.grad_target) return node.grad_target->grad();
  if (node.grad.empty()) node.grad.assign(node.owned.size(), 0.0);
  return node.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("backward: loss belongs to another tape");
  if (value(loss.id).size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_string(value(loss.id).shape()));
  }
  for (Node& node : nodes_) {
    if (!node.needs_grad) continue;
    if (node.grad_target) {
      node.grad_target->zero_grad();
    } else {
      node.grad.assign(node.owned.size(), 0.0);
    }
  }
  if (!nodes_[loss.id].needs_grad) return;
  grad_buffer(loss.id)[0] = 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (node.needs_grad && node.backward) node.backward(*this, id);
  }
}

}  // namespace ecpe::ad
