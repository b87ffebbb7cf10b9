#pragma once

#include <deque>
#include <functional>
#include <memory>

#include "slic/tensor.hpp"

namespace slic {

class Tape;

// One node of the reverse-mode tape. Values either live in the node or
// alias external storage (parameters, dataset tensors) to avoid copies.
struct Node {
  std::vector<int> shape;
  Arr vown;
  const Arr* vsrc = nullptr;  // aliased value when set
  Arr grad;                   // allocated lazily on first accumulation
  Arr* gsink = nullptr;       // external accumulator, flushed after backward
  bool needs_grad = false;
  std::function<void()> backprop;  // pulls this->grad into parents

  const Arr& v() const { return vsrc ? *vsrc : vown; }
  int64_t size() const { return v().size(); }

  void ensure_grad() {
    if (grad.size() == 0) grad = Arr::Zero(size());
  }
};

// Lightweight handle into a tape.
struct Var {
  Node* n = nullptr;
  Tape* tape = nullptr;

  const Arr& v() const { return n->v(); }
  const std::vector<int>& shape() const { return n->shape; }
  int dim(int i) const { return n->shape.at(static_cast<size_t>(i)); }
  int64_t size() const { return n->size(); }
  bool valid() const { return n != nullptr; }
  Scalar item() const {
    if (n->size() != 1) throw std::logic_error("Var::item on non-scalar");
    return n->v()[0];
  }
};

// Dynamic computation graph. Nodes are created in topological order, so a
// reverse sweep over the deque is a valid backward schedule. A tape is
// built per sample and discarded; parameters alias external storage and
// flush their gradients into ParamStore accumulators.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  // Constant leaf (owned copy).
  Var constant(TensorData t);
  // Constant leaf aliasing external storage; caller keeps it alive.
  Var constant_ref(const std::vector<int>& shape, const Arr& storage);
  // Differentiable leaf (inputs under test); gradient kept on the node.
  Var leaf(TensorData t);
  // Parameter leaf: value aliased, gradient flushed into *gsink.
  Var param(const std::vector<int>& shape, const Arr& storage, Arr* gsink, bool trainable);

  // Raw node for op implementations.
  Var make(std::vector<int> shape, bool needs_grad);

  // Seeds d(root)/d(root) = seed and runs the reverse sweep, then flushes
  // parameter gradient sinks. root must be scalar.
  void backward(Var root, Scalar seed = 1.0);

  size_t node_count() const { return nodes_.size(); }

 private:
  std::deque<Node> nodes_;
  std::vector<Node*> sinks_;  // nodes with external gradient accumulators
  bool grad_enabled_ = true;
};

// Gradient of a leaf after backward().
inline const Arr& grad_of(const Var& x) { return x.n->grad; }

}  // namespace slic
