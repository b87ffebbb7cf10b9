#include <cmath>

#include "slic/nn_ops.hpp"

namespace slic {

namespace {

constexpr Scalar kTwoPi = 6.283185307179586476925286766559;

Tape& tape_of(const Var& a) {
  if (!a.tape) throw std::logic_error("op on detached Var");
  return *a.tape;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!same_shape(a.shape(), b.shape()))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
}

}  // namespace

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad || b.n->needs_grad);
  out.n->vown = a.v() + b.v();
  if (out.n->needs_grad) {
    Node *an = a.n, *bn = b.n, *on = out.n;
    on->backprop = [an, bn, on] {
      if (an->needs_grad) { an->ensure_grad(); an->grad += on->grad; }
      if (bn->needs_grad) { bn->ensure_grad(); bn->grad += on->grad; }
    };
  }
  return out;
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad || b.n->needs_grad);
  out.n->vown = a.v() - b.v();
  if (out.n->needs_grad) {
    Node *an = a.n, *bn = b.n, *on = out.n;
    on->backprop = [an, bn, on] {
      if (an->needs_grad) { an->ensure_grad(); an->grad += on->grad; }
      if (bn->needs_grad) { bn->ensure_grad(); bn->grad -= on->grad; }
    };
  }
  return out;
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad || b.n->needs_grad);
  out.n->vown = a.v() * b.v();
  if (out.n->needs_grad) {
    Node *an = a.n, *bn = b.n, *on = out.n;
    on->backprop = [an, bn, on] {
      if (an->needs_grad) { an->ensure_grad(); an->grad += on->grad * bn->v(); }
      if (bn->needs_grad) { bn->ensure_grad(); bn->grad += on->grad * an->v(); }
    };
  }
  return out;
}

Var div(Var a, Var b) {
  check_same_shape(a, b, "div");
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad || b.n->needs_grad);
  out.n->vown = a.v() / b.v();
  if (out.n->needs_grad) {
    Node *an = a.n, *bn = b.n, *on = out.n;
    on->backprop = [an, bn, on] {
      if (an->needs_grad) {
        an->ensure_grad();
        an->grad += on->grad / bn->v();
      }
      if (bn->needs_grad) {
        bn->ensure_grad();
        bn->grad -= on->grad * an->v() / bn->v().square();
      }
    };
  }
  return out;
}

Var log_op(Var a) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = a.v().log();
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on] {
      an->ensure_grad();
      an->grad += on->grad / an->v();
    };
  }
  return out;
}

Var scale(Var a, Scalar s) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = a.v() * s;
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on, s] { an->ensure_grad(); an->grad += on->grad * s; };
  }
  return out;
}

Var add_scalar(Var a, Scalar s) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = a.v() + s;
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on] { an->ensure_grad(); an->grad += on->grad; };
  }
  return out;
}

Var leaky_relu(Var a, Scalar slope) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = (a.v() >= 0.0).select(a.v(), a.v() * slope);
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on, slope] {
      an->ensure_grad();
      an->grad += (an->v() >= 0.0).select(on->grad, on->grad * slope);
    };
  }
  return out;
}

Var relu(Var a) { return leaky_relu(a, 0.0); }

Var sigmoid(Var a) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = 1.0 / (1.0 + (-a.v()).exp());
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on] {
      an->ensure_grad();
      an->grad += on->grad * on->vown * (1.0 - on->vown);
    };
  }
  return out;
}

Var tanh_op(Var a) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = a.v().tanh();
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on] {
      an->ensure_grad();
      an->grad += on->grad * (1.0 - on->vown.square());
    };
  }
  return out;
}

Var square(Var a) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = a.v().square();
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on] { an->ensure_grad(); an->grad += on->grad * 2.0 * an->v(); };
  }
  return out;
}

Var sqrt_op(Var a, Scalar eps) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = (a.v() + eps).sqrt();
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on] { an->ensure_grad(); an->grad += on->grad / (2.0 * on->vown); };
  }
  return out;
}

Var clamp01(Var a) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = a.v().min(1.0).max(0.0);
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on] {
      an->ensure_grad();
      an->grad += ((an->v() >= 0.0) && (an->v() <= 1.0)).select(on->grad, 0.0);
    };
  }
  return out;
}

Var smooth_round(Var a) {
  Var out = tape_of(a).make(a.shape(), a.n->needs_grad);
  out.n->vown = a.v() - (a.v() * kTwoPi).sin() / kTwoPi;
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on] {
      an->ensure_grad();
      an->grad += on->grad * (1.0 - (an->v() * kTwoPi).cos());
    };
  }
  return out;
}

Var sum(Var a) {
  Var out = tape_of(a).make({1}, a.n->needs_grad);
  out.n->vown = Arr::Constant(1, a.v().sum());
  if (out.n->needs_grad) {
    Node *an = a.n, *on = out.n;
    on->backprop = [an, on] { an->ensure_grad(); an->grad += on->grad[0]; };
  }
  return out;
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<Scalar>(a.size())); }

Var mse(Var a, Var b) {
  check_same_shape(a, b, "mse");
  Var out = tape_of(a).make({1}, a.n->needs_grad || b.n->needs_grad);
  Scalar inv_n = 1.0 / static_cast<Scalar>(a.size());
  out.n->vown = Arr::Constant(1, (a.v() - b.v()).square().sum() * inv_n);
  if (out.n->needs_grad) {
    Node *an = a.n, *bn = b.n, *on = out.n;
    on->backprop = [an, bn, on, inv_n] {
      Arr d = 2.0 * inv_n * on->grad[0] * (an->v() - bn->v());
      if (an->needs_grad) { an->ensure_grad(); an->grad += d; }
      if (bn->needs_grad) { bn->ensure_grad(); bn->grad -= d; }
    };
  }
  return out;
}

Var bce_with_logits(Var logits, const Arr& targets) {
  if (logits.size() != targets.size())
    throw std::invalid_argument("bce_with_logits: length mismatch");
  Var out = tape_of(logits).make({1}, logits.n->needs_grad);
  const Arr& z = logits.v();
  // stable: max(z,0) - z*t + log1p(exp(-|z|))
  Arr per_bit = z.max(0.0) - z * targets + (-z.abs()).exp().log1p();
  Scalar inv_n = 1.0 / static_cast<Scalar>(z.size());
  out.n->vown = Arr::Constant(1, per_bit.sum() * inv_n);
  if (out.n->needs_grad) {
    Node *ln = logits.n, *on = out.n;
    Arr t = targets;
    on->backprop = [ln, on, t, inv_n] {
      ln->ensure_grad();
      Arr sig = 1.0 / (1.0 + (-ln->v()).exp());
      ln->grad += on->grad[0] * inv_n * (sig - t);
    };
  }
  return out;
}

Var broadcast_chw(Var vec, int h, int w) {
  if (vec.shape().size() != 1) throw std::invalid_argument("broadcast_chw: rank-1 input expected");
  int c = vec.dim(0);
  Var out = tape_of(vec).make({c, h, w}, vec.n->needs_grad);
  out.n->vown = Arr(static_cast<int64_t>(c) * h * w);
  int64_t plane = static_cast<int64_t>(h) * w;
  for (int i = 0; i < c; ++i) out.n->vown.segment(i * plane, plane).setConstant(vec.v()[i]);
  if (out.n->needs_grad) {
    Node *vn = vec.n, *on = out.n;
    on->backprop = [vn, on, c, plane] {
      vn->ensure_grad();
      for (int i = 0; i < c; ++i) vn->grad[i] += on->grad.segment(i * plane, plane).sum();
    };
  }
  return out;
}

Var global_avg_pool(Var x) {
  if (x.shape().size() != 3) throw std::invalid_argument("global_avg_pool: rank-3 input expected");
  int c = x.dim(0);
  int64_t plane = static_cast<int64_t>(x.dim(1)) * x.dim(2);
  Var out = tape_of(x).make({c}, x.n->needs_grad);
  out.n->vown = Arr(c);
  for (int i = 0; i < c; ++i) out.n->vown[i] = x.v().segment(i * plane, plane).mean();
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    on->backprop = [xn, on, c, plane] {
      xn->ensure_grad();
      Scalar inv = 1.0 / static_cast<Scalar>(plane);
      for (int i = 0; i < c; ++i) xn->grad.segment(i * plane, plane) += on->grad[i] * inv;
    };
  }
  return out;
}

Var slice_channels(Var x, int c0, int len) {
  if (x.shape().size() != 3) throw std::invalid_argument("slice_channels: rank-3 input expected");
  if (c0 < 0 || c0 + len > x.dim(0)) throw std::invalid_argument("slice_channels: out of range");
  int64_t plane = static_cast<int64_t>(x.dim(1)) * x.dim(2);
  Var out = tape_of(x).make({len, x.dim(1), x.dim(2)}, x.n->needs_grad);
  out.n->vown = x.v().segment(c0 * plane, static_cast<int64_t>(len) * plane);
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    on->backprop = [xn, on, c0, len, plane] {
      xn->ensure_grad();
      xn->grad.segment(c0 * plane, static_cast<int64_t>(len) * plane) += on->grad;
    };
  }
  return out;
}

Var concat_channels(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_channels: empty");
  int h = xs[0].dim(1), w = xs[0].dim(2), ctot = 0;
  bool ng = false;
  for (const Var& x : xs) {
    if (x.shape().size() != 3 || x.dim(1) != h || x.dim(2) != w)
      throw std::invalid_argument("concat_channels: incompatible shapes");
    ctot += x.dim(0);
    ng = ng || x.n->needs_grad;
  }
  Var out = xs[0].tape->make({ctot, h, w}, ng);
  out.n->vown = Arr(static_cast<int64_t>(ctot) * h * w);
  int64_t plane = static_cast<int64_t>(h) * w, off = 0;
  for (const Var& x : xs) {
    out.n->vown.segment(off, x.size()) = x.v();
    off += x.size();
  }
  if (out.n->needs_grad) {
    std::vector<Node*> parents;
    for (const Var& x : xs) parents.push_back(x.n);
    Node* on = out.n;
    on->backprop = [parents, on, plane] {
      (void)plane;
      int64_t o = 0;
      for (Node* p : parents) {
        if (p->needs_grad) {
          p->ensure_grad();
          p->grad += on->grad.segment(o, p->size());
        }
        o += p->size();
      }
    };
  }
  return out;
}

Var linear(Var x, Var w, Var b) {
  if (x.shape().size() != 1 || w.shape().size() != 2 || w.dim(1) != x.dim(0) ||
      b.dim(0) != w.dim(0))
    throw std::invalid_argument("linear: shape mismatch");
  int m = w.dim(0), k = w.dim(1);
  Var out = tape_of(x).make({m}, x.n->needs_grad || w.n->needs_grad || b.n->needs_grad);
  CMapRowMat wm(w.v().data(), m, k);
  out.n->vown = (wm * x.v().matrix()).array() + b.v();
  if (out.n->needs_grad) {
    Node *xn = x.n, *wn = w.n, *bn = b.n, *on = out.n;
    on->backprop = [xn, wn, bn, on, m, k] {
      CMapRowMat wmv(wn->v().data(), m, k);
      if (xn->needs_grad) {
        xn->ensure_grad();
        xn->grad.matrix() += wmv.transpose() * on->grad.matrix();
      }
      if (wn->needs_grad) {
        wn->ensure_grad();
        MapRowMat gw(wn->grad.data(), m, k);
        gw.noalias() += on->grad.matrix() * xn->v().matrix().transpose();
      }
      if (bn->needs_grad) {
        bn->ensure_grad();
        bn->grad += on->grad;
      }
    };
  }
  return out;
}

Var channel_mix(Var x, const Eigen::Matrix3d& m, const Eigen::Vector3d& off) {
  if (x.shape().size() != 3 || x.dim(0) != 3)
    throw std::invalid_argument("channel_mix: (3,H,W) input expected");
  int64_t plane = static_cast<int64_t>(x.dim(1)) * x.dim(2);
  Var out = tape_of(x).make(x.shape(), x.n->needs_grad);
  out.n->vown = Arr(x.size());
  CMapRowMat xm(x.v().data(), 3, plane);
  MapRowMat om(out.n->vown.data(), 3, plane);
  om.noalias() = m * xm;
  om.colwise() += off;
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    Eigen::Matrix3d mt = m.transpose();
    on->backprop = [xn, on, mt, plane] {
      xn->ensure_grad();
      CMapRowMat gm(on->grad.data(), 3, plane);
      MapRowMat xg(xn->grad.data(), 3, plane);
      xg.noalias() += mt * gm;
    };
  }
  return out;
}

Var channel_l2_normalize(Var x, Scalar eps) {
  if (x.shape().size() != 3) throw std::invalid_argument("channel_l2_normalize: rank-3 expected");
  int c = x.dim(0);
  int64_t plane = static_cast<int64_t>(x.dim(1)) * x.dim(2);
  Var out = tape_of(x).make(x.shape(), x.n->needs_grad);
  // norm per spatial position over channels
  Arr nrm = Arr::Constant(plane, eps);
  for (int i = 0; i < c; ++i) nrm += x.v().segment(i * plane, plane).square();
  nrm = nrm.sqrt();
  out.n->vown = Arr(x.size());
  for (int i = 0; i < c; ++i)
    out.n->vown.segment(i * plane, plane) = x.v().segment(i * plane, plane) / nrm;
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    on->backprop = [xn, on, c, plane, nrm] {
      xn->ensure_grad();
      // dL/dx_i = (g_i - y_i * sum_j(g_j*y_j)) / nrm
      Arr dot = Arr::Zero(plane);
      for (int i = 0; i < c; ++i)
        dot += on->grad.segment(i * plane, plane) * on->vown.segment(i * plane, plane);
      for (int i = 0; i < c; ++i)
        xn->grad.segment(i * plane, plane) +=
            (on->grad.segment(i * plane, plane) -
             on->vown.segment(i * plane, plane) * dot) / nrm;
    };
  }
  return out;
}

}  // namespace slic
