#include "slic/autodiff.hpp"

namespace slic {

Var Tape::make(std::vector<int> shape, bool needs_grad) {
  nodes_.emplace_back();
  Node& n = nodes_.back();
  n.shape = std::move(shape);
  n.needs_grad = needs_grad && grad_enabled_;
  return Var{&n, this};
}

Var Tape::constant(TensorData t) {
  Var out = make(t.shape, false);
  out.n->vown = std::move(t.v);
  return out;
}

Var Tape::constant_ref(const std::vector<int>& shape, const Arr& storage) {
  if (TensorData::count(shape) != storage.size())
    throw std::invalid_argument("constant_ref: shape/storage mismatch");
  Var out = make(shape, false);
  out.n->vsrc = &storage;
  return out;
}

Var Tape::leaf(TensorData t) {
  Var out = make(t.shape, true);
  out.n->vown = std::move(t.v);
  return out;
}

Var Tape::param(const std::vector<int>& shape, const Arr& storage, Arr* gsink, bool trainable) {
  if (TensorData::count(shape) != storage.size())
    throw std::invalid_argument("param: shape/storage mismatch");
  Var out = make(shape, trainable);
  out.n->vsrc = &storage;
  if (trainable && grad_enabled_) {
    out.n->gsink = gsink;
    sinks_.push_back(out.n);
  }
  return out;
}

void Tape::backward(Var root, Scalar seed) {
  if (!grad_enabled_) throw std::logic_error("backward on a no-grad tape");
  if (root.n->size() != 1) throw std::logic_error("backward root must be scalar");
  root.n->ensure_grad();
  root.n->grad[0] += seed;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->needs_grad && it->grad.size() != 0 && it->backprop) it->backprop();
  }
  for (Node* s : sinks_) {
    if (s->grad.size() != 0 && s->gsink) *s->gsink += s->grad;
  }
}

}  // namespace slic
