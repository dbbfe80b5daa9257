#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "ecpe/tensor.hpp"

namespace ecpe::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while its tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
};

/// Append-only record of a computation for reverse-mode differentiation.
/// References returned by value() stay valid for the life of the tape.
///
/// Node ids are assigned in creation order, so every input id is smaller than
/// its consumer's id and backward() is a single descending sweep. A tape is
/// owned by one thread; separate tapes share nothing.
class Tape {
 public:
  /// Called during backward with the tape and the node's own id. The function
  /// reads grad(self) and accumulates into grad_buffer(input) for each input
  /// that needs a gradient.
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value that never receives a gradient.
  Var constant(Tensor value);
  /// Tape-owned value that receives a gradient (read it back with grad()).
  Var variable(Tensor value);
  /// Reference to an external tensor. If it requires grad, backward()
  /// writes its total derivative into param.grad(). The tensor must outlive
  /// the tape and must not be resized while bound.
  Var parameter(Tensor& param);
  /// Read-only reference to an external tensor; never receives a gradient.
  Var view(const Tensor& value);

  /// Records a derived value. `backward` is dropped when no input needs a
  /// gradient.
  Var record(std::string_view op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(std::size_t id) const;
  std::string_view op(std::size_t id) const { return nodes_.at(id).op; }
  std::span<const std::size_t> inputs(std::size_t id) const { return nodes_.at(id).inputs; }
  bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradient of node `id` after backward(); empty for nodes without one.
  std::span<const double> grad(std::size_t id) const;
  /// Writable gradient buffer for accumulation; empty if the node needs none.
  std::span<double> grad_buffer(std::size_t id);

  /// Populates gradients of every node that needs one with d(loss)/d(node).
  /// Gradients are reset first, so nodes the loss does not depend on end at
  /// zero. Throws ContractError unless `loss` holds exactly one value.
  void backward(Var loss);

 private:
  struct Node {
    std::string_view op;
    std::vector<std::size_t> inputs;
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor* grad_target = nullptr;
    std::vector<double> grad;
    bool needs_grad = false;
    BackwardFn backward;
  };

  // deque keeps value references stable while the tape grows.
  std::deque<Node> nodes_;
};

}  // namespace ecpe::ad
