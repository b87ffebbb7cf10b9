#include <cmath>

#include "slic/nn_ops.hpp"

namespace slic {

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  int period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

using Mat8 = Eigen::Matrix<Scalar, 8, 8>;

// Orthonormal DCT-II basis: D(k,n) = s_k cos(pi (2n+1) k / 16).
const Mat8& dct8_basis() {
  static const Mat8 d = [] {
    Mat8 m;
    for (int k = 0; k < 8; ++k) {
      Scalar s = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n)
        m(k, n) = s * std::cos(M_PI * (2 * n + 1) * k / 16.0);
    }
    return m;
  }();
  return d;
}

void dct8_apply(const Arr& src, Arr& dst, int c, int h, int w, bool inverse) {
  const Mat8& d = dct8_basis();
  Mat8 blk, tmp;
  for (int cc = 0; cc < c; ++cc)
    for (int by = 0; by < h; by += 8)
      for (int bx = 0; bx < w; bx += 8) {
        const Scalar* sp = src.data() + (static_cast<int64_t>(cc) * h + by) * w + bx;
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) blk(i, j) = sp[static_cast<int64_t>(i) * w + j];
        if (inverse)
          tmp.noalias() = d.transpose() * blk * d;
        else
          tmp.noalias() = d * blk * d.transpose();
        Scalar* dp = dst.data() + (static_cast<int64_t>(cc) * h + by) * w + bx;
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) dp[static_cast<int64_t>(i) * w + j] = tmp(i, j);
      }
}

}  // namespace

Var affine_warp(Var x, const AffineCoeffs& m) {
  if (x.shape().size() != 3) throw std::invalid_argument("affine_warp: rank-3 expected");
  int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Var out = x.tape->make({c, h, w}, x.n->needs_grad);
  out.n->vown = Arr(x.v().size());
  for (int y = 0; y < h; ++y)
    for (int xx = 0; xx < w; ++xx) {
      Scalar sx = m.a * xx + m.b * y + m.c;
      Scalar sy = m.d * xx + m.e * y + m.f;
      int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      Scalar fx = sx - x0, fy = sy - y0;
      int xs[2] = {reflect101(x0, w), reflect101(x0 + 1, w)};
      int ys[2] = {reflect101(y0, h), reflect101(y0 + 1, h)};
      for (int cc = 0; cc < c; ++cc) {
        const Scalar* src = x.v().data() + static_cast<int64_t>(cc) * h * w;
        out.n->vown[(static_cast<int64_t>(cc) * h + y) * w + xx] =
            (1 - fy) * ((1 - fx) * src[static_cast<int64_t>(ys[0]) * w + xs[0]] +
                        fx * src[static_cast<int64_t>(ys[0]) * w + xs[1]]) +
            fy * ((1 - fx) * src[static_cast<int64_t>(ys[1]) * w + xs[0]] +
                  fx * src[static_cast<int64_t>(ys[1]) * w + xs[1]]);
      }
    }
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    on->backprop = [xn, on, m, c, h, w] {
      xn->ensure_grad();
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
          Scalar sx = m.a * xx + m.b * y + m.c;
          Scalar sy = m.d * xx + m.e * y + m.f;
          int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
          Scalar fx = sx - x0, fy = sy - y0;
          int xs[2] = {reflect101(x0, w), reflect101(x0 + 1, w)};
          int ys[2] = {reflect101(y0, h), reflect101(y0 + 1, h)};
          for (int cc = 0; cc < c; ++cc) {
            Scalar* xg = xn->grad.data() + static_cast<int64_t>(cc) * h * w;
            Scalar gv = on->grad[(static_cast<int64_t>(cc) * h + y) * w + xx];
            xg[static_cast<int64_t>(ys[0]) * w + xs[0]] += (1 - fy) * (1 - fx) * gv;
            xg[static_cast<int64_t>(ys[0]) * w + xs[1]] += (1 - fy) * fx * gv;
            xg[static_cast<int64_t>(ys[1]) * w + xs[0]] += fy * (1 - fx) * gv;
            xg[static_cast<int64_t>(ys[1]) * w + xs[1]] += fy * fx * gv;
          }
        }
    };
  }
  return out;
}

Var block_dct8(Var x, bool inverse) {
  if (x.shape().size() != 3 || x.dim(1) % 8 || x.dim(2) % 8)
    throw std::invalid_argument("block_dct8: dims must be multiples of 8");
  int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Var out = x.tape->make(x.shape(), x.n->needs_grad);
  out.n->vown = Arr(x.v().size());
  dct8_apply(x.v(), out.n->vown, c, h, w, inverse);
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    // The basis is orthonormal, so the adjoint is the opposite transform.
    on->backprop = [xn, on, c, h, w, inverse] {
      xn->ensure_grad();
      Arr tmp(on->grad.size());
      dct8_apply(on->grad, tmp, c, h, w, !inverse);
      xn->grad += tmp;
    };
  }
  return out;
}

}  // namespace slic
