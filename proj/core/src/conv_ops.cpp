#include "slic/nn_ops.hpp"

namespace slic {

namespace {

// col(k,pos) = src[c, oy*s-p+i, ox*s-p+j], zero outside. k=(c*kh+i)*kw+j,
// pos = oy*wo+ox. Shared by conv2d forward/backward and (with roles
// swapped) conv_transpose2d.
Mat im2col(const Arr& src, int c, int h, int w, int kh, int kw, int s, int p, int ho, int wo) {
  Mat col = Mat::Zero(static_cast<int64_t>(c) * kh * kw, static_cast<int64_t>(ho) * wo);
  for (int oy = 0; oy < ho; ++oy) {
    for (int ox = 0; ox < wo; ++ox) {
      int64_t pos = static_cast<int64_t>(oy) * wo + ox;
      Scalar* colp = col.data() + pos * col.rows();
      for (int cc = 0; cc < c; ++cc) {
        const Scalar* plane = src.data() + static_cast<int64_t>(cc) * h * w;
        for (int i = 0; i < kh; ++i) {
          int y = oy * s - p + i;
          int base = (cc * kh + i) * kw;
          if (y < 0 || y >= h) continue;
          for (int j = 0; j < kw; ++j) {
            int x = ox * s - p + j;
            if (x < 0 || x >= w) continue;
            colp[base + j] = plane[static_cast<int64_t>(y) * w + x];
          }
        }
      }
    }
  }
  return col;
}

void col2im_add(const Mat& col, Arr& dst, int c, int h, int w, int kh, int kw, int s, int p,
                int ho, int wo) {
  for (int oy = 0; oy < ho; ++oy) {
    for (int ox = 0; ox < wo; ++ox) {
      int64_t pos = static_cast<int64_t>(oy) * wo + ox;
      const Scalar* colp = col.data() + pos * col.rows();
      for (int cc = 0; cc < c; ++cc) {
        Scalar* plane = dst.data() + static_cast<int64_t>(cc) * h * w;
        for (int i = 0; i < kh; ++i) {
          int y = oy * s - p + i;
          int base = (cc * kh + i) * kw;
          if (y < 0 || y >= h) continue;
          for (int j = 0; j < kw; ++j) {
            int x = ox * s - p + j;
            if (x < 0 || x >= w) continue;
            plane[static_cast<int64_t>(y) * w + x] += colp[base + j];
          }
        }
      }
    }
  }
}

int reflect101(int i, int n) {
  if (n == 1) return 0;
  int period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

}  // namespace

Var conv2d(Var x, Var w, Var b, int stride, int pad) {
  if (x.shape().size() != 3 || w.shape().size() != 4 || w.dim(1) != x.dim(0))
    throw std::invalid_argument("conv2d: shape mismatch");
  int c = x.dim(0), h = x.dim(1), wd = x.dim(2);
  int o = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  int ho = (h + 2 * pad - kh) / stride + 1;
  int wo = (wd + 2 * pad - kw) / stride + 1;
  if (ho <= 0 || wo <= 0) throw std::invalid_argument("conv2d: input smaller than kernel");
  int64_t k = static_cast<int64_t>(c) * kh * kw, p = static_cast<int64_t>(ho) * wo;

  Var out = x.tape->make({o, ho, wo},
                         x.n->needs_grad || w.n->needs_grad || b.n->needs_grad);
  out.n->vown = Arr(static_cast<int64_t>(o) * p);
  {
    Mat col = im2col(x.v(), c, h, wd, kh, kw, stride, pad, ho, wo);
    CMapRowMat wm(w.v().data(), o, k);
    MapRowMat om(out.n->vown.data(), o, p);
    om.noalias() = wm * col;
    for (int i = 0; i < o; ++i) om.row(i).array() += b.v()[i];
  }
  if (out.n->needs_grad) {
    Node *xn = x.n, *wn = w.n, *bn = b.n, *on = out.n;
    on->backprop = [xn, wn, bn, on, c, h, wd, o, kh, kw, stride, pad, ho, wo, k, p] {
      CMapRowMat g(on->grad.data(), o, p);
      if (bn->needs_grad) {
        bn->ensure_grad();
        for (int i = 0; i < o; ++i) bn->grad[i] += g.row(i).sum();
      }
      if (wn->needs_grad) {
        wn->ensure_grad();
        Mat col = im2col(xn->v(), c, h, wd, kh, kw, stride, pad, ho, wo);
        MapRowMat gw(wn->grad.data(), o, k);
        gw.noalias() += g * col.transpose();
      }
      if (xn->needs_grad) {
        xn->ensure_grad();
        CMapRowMat wmv(wn->v().data(), o, k);
        Mat dcol = wmv.transpose() * g;
        col2im_add(dcol, xn->grad, c, h, wd, kh, kw, stride, pad, ho, wo);
      }
    };
  }
  return out;
}

Var conv_transpose2d(Var x, Var w, Var b, int stride, int pad, int out_pad) {
  if (x.shape().size() != 3 || w.shape().size() != 4 || w.dim(0) != x.dim(0))
    throw std::invalid_argument("conv_transpose2d: shape mismatch");
  int c = x.dim(0), h = x.dim(1), wd = x.dim(2);
  int o = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  int hout = (h - 1) * stride - 2 * pad + kh + out_pad;
  int wout = (wd - 1) * stride - 2 * pad + kw + out_pad;
  if (hout <= 0 || wout <= 0) throw std::invalid_argument("conv_transpose2d: bad output dims");
  int64_t k = static_cast<int64_t>(o) * kh * kw, p = static_cast<int64_t>(h) * wd;

  Var out = x.tape->make({o, hout, wout},
                         x.n->needs_grad || w.n->needs_grad || b.n->needs_grad);
  out.n->vown = Arr::Zero(static_cast<int64_t>(o) * hout * wout);
  {
    CMapRowMat wm(w.v().data(), c, k);
    CMapRowMat xm(x.v().data(), c, p);
    Mat colt = wm.transpose() * xm;  // (o*kh*kw) x (h*w)
    col2im_add(colt, out.n->vown, o, hout, wout, kh, kw, stride, pad, h, wd);
    int64_t plane = static_cast<int64_t>(hout) * wout;
    for (int i = 0; i < o; ++i) out.n->vown.segment(i * plane, plane) += b.v()[i];
  }
  if (out.n->needs_grad) {
    Node *xn = x.n, *wn = w.n, *bn = b.n, *on = out.n;
    on->backprop = [xn, wn, bn, on, c, h, wd, o, kh, kw, stride, pad, hout, wout, k, p] {
      int64_t plane = static_cast<int64_t>(hout) * wout;
      if (bn->needs_grad) {
        bn->ensure_grad();
        for (int i = 0; i < o; ++i) bn->grad[i] += on->grad.segment(i * plane, plane).sum();
      }
      if (wn->needs_grad || xn->needs_grad) {
        Mat colg = im2col(on->grad, o, hout, wout, kh, kw, stride, pad, h, wd);  // k x p
        if (xn->needs_grad) {
          xn->ensure_grad();
          CMapRowMat wmv(wn->v().data(), c, k);
          MapRowMat xg(xn->grad.data(), c, p);
          xg.noalias() += wmv * colg;
        }
        if (wn->needs_grad) {
          wn->ensure_grad();
          CMapRowMat xm(xn->v().data(), c, p);
          MapRowMat gw(wn->grad.data(), c, k);
          gw.noalias() += xm * colg.transpose();
        }
      }
    };
  }
  return out;
}

Var filter2d_valid(Var x, const TensorData& kernel) {
  if (x.shape().size() != 3 || kernel.shape.size() != 2)
    throw std::invalid_argument("filter2d_valid: bad ranks");
  int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  int kh = kernel.dim(0), kw = kernel.dim(1);
  int ho = h - kh + 1, wo = w - kw + 1;
  if (ho <= 0 || wo <= 0) throw std::invalid_argument("filter2d_valid: input smaller than kernel");
  Var out = x.tape->make({c, ho, wo}, x.n->needs_grad);
  out.n->vown = Arr::Zero(static_cast<int64_t>(c) * ho * wo);
  for (int cc = 0; cc < c; ++cc) {
    const Scalar* src = x.v().data() + static_cast<int64_t>(cc) * h * w;
    Scalar* dst = out.n->vown.data() + static_cast<int64_t>(cc) * ho * wo;
    for (int y = 0; y < ho; ++y)
      for (int xx = 0; xx < wo; ++xx) {
        Scalar acc = 0;
        for (int i = 0; i < kh; ++i)
          for (int j = 0; j < kw; ++j)
            acc += kernel.v[i * kw + j] * src[static_cast<int64_t>(y + i) * w + xx + j];
        dst[static_cast<int64_t>(y) * wo + xx] = acc;
      }
  }
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    TensorData ker = kernel;
    on->backprop = [xn, on, ker, c, h, w, kh, kw, ho, wo] {
      xn->ensure_grad();
      for (int cc = 0; cc < c; ++cc) {
        Scalar* xg = xn->grad.data() + static_cast<int64_t>(cc) * h * w;
        const Scalar* g = on->grad.data() + static_cast<int64_t>(cc) * ho * wo;
        for (int y = 0; y < ho; ++y)
          for (int xx = 0; xx < wo; ++xx) {
            Scalar gv = g[static_cast<int64_t>(y) * wo + xx];
            if (gv == 0.0) continue;
            for (int i = 0; i < kh; ++i)
              for (int j = 0; j < kw; ++j)
                xg[static_cast<int64_t>(y + i) * w + xx + j] += ker.v[i * kw + j] * gv;
          }
      }
    };
  }
  return out;
}

Var pad_reflect(Var x, int top, int bottom, int left, int right) {
  if (x.shape().size() != 3) throw std::invalid_argument("pad_reflect: rank-3 expected");
  int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (top >= h || bottom >= h || left >= w || right >= w)
    throw std::invalid_argument("pad_reflect: padding exceeds input size");
  int ho = h + top + bottom, wo = w + left + right;
  Var out = x.tape->make({c, ho, wo}, x.n->needs_grad);
  out.n->vown = Arr(static_cast<int64_t>(c) * ho * wo);
  for (int cc = 0; cc < c; ++cc) {
    const Scalar* src = x.v().data() + static_cast<int64_t>(cc) * h * w;
    Scalar* dst = out.n->vown.data() + static_cast<int64_t>(cc) * ho * wo;
    for (int y = 0; y < ho; ++y) {
      int sy = reflect101(y - top, h);
      for (int xx = 0; xx < wo; ++xx)
        dst[static_cast<int64_t>(y) * wo + xx] =
            src[static_cast<int64_t>(sy) * w + reflect101(xx - left, w)];
    }
  }
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    on->backprop = [xn, on, c, h, w, top, left, ho, wo] {
      xn->ensure_grad();
      for (int cc = 0; cc < c; ++cc) {
        Scalar* xg = xn->grad.data() + static_cast<int64_t>(cc) * h * w;
        const Scalar* g = on->grad.data() + static_cast<int64_t>(cc) * ho * wo;
        for (int y = 0; y < ho; ++y) {
          int sy = reflect101(y - top, h);
          for (int xx = 0; xx < wo; ++xx)
            xg[static_cast<int64_t>(sy) * w + reflect101(xx - left, w)] +=
                g[static_cast<int64_t>(y) * wo + xx];
        }
      }
    };
  }
  return out;
}

Var crop(Var x, int top, int left, int h, int w) {
  if (x.shape().size() != 3) throw std::invalid_argument("crop: rank-3 expected");
  int c = x.dim(0), hs = x.dim(1), ws = x.dim(2);
  if (top < 0 || left < 0 || top + h > hs || left + w > ws)
    throw std::invalid_argument("crop: region out of bounds");
  Var out = x.tape->make({c, h, w}, x.n->needs_grad);
  out.n->vown = Arr(static_cast<int64_t>(c) * h * w);
  for (int cc = 0; cc < c; ++cc)
    for (int y = 0; y < h; ++y)
      out.n->vown.segment((static_cast<int64_t>(cc) * h + y) * w, w) =
          x.v().segment((static_cast<int64_t>(cc) * hs + top + y) * ws + left, w);
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    on->backprop = [xn, on, c, h, w, hs, ws, top, left] {
      xn->ensure_grad();
      for (int cc = 0; cc < c; ++cc)
        for (int y = 0; y < h; ++y)
          xn->grad.segment((static_cast<int64_t>(cc) * hs + top + y) * ws + left, w) +=
              on->grad.segment((static_cast<int64_t>(cc) * h + y) * w, w);
    };
  }
  return out;
}

Var avg_pool2(Var x) {
  if (x.shape().size() != 3 || x.dim(1) % 2 || x.dim(2) % 2)
    throw std::invalid_argument("avg_pool2: even rank-3 dims expected");
  int c = x.dim(0), h = x.dim(1), w = x.dim(2), ho = h / 2, wo = w / 2;
  Var out = x.tape->make({c, ho, wo}, x.n->needs_grad);
  out.n->vown = Arr(static_cast<int64_t>(c) * ho * wo);
  for (int cc = 0; cc < c; ++cc) {
    const Scalar* src = x.v().data() + static_cast<int64_t>(cc) * h * w;
    Scalar* dst = out.n->vown.data() + static_cast<int64_t>(cc) * ho * wo;
    for (int y = 0; y < ho; ++y)
      for (int xx = 0; xx < wo; ++xx)
        dst[static_cast<int64_t>(y) * wo + xx] =
            0.25 * (src[static_cast<int64_t>(2 * y) * w + 2 * xx] +
                    src[static_cast<int64_t>(2 * y) * w + 2 * xx + 1] +
                    src[static_cast<int64_t>(2 * y + 1) * w + 2 * xx] +
                    src[static_cast<int64_t>(2 * y + 1) * w + 2 * xx + 1]);
  }
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    on->backprop = [xn, on, c, h, w, ho, wo] {
      xn->ensure_grad();
      for (int cc = 0; cc < c; ++cc) {
        Scalar* xg = xn->grad.data() + static_cast<int64_t>(cc) * h * w;
        const Scalar* g = on->grad.data() + static_cast<int64_t>(cc) * ho * wo;
        for (int y = 0; y < ho; ++y)
          for (int xx = 0; xx < wo; ++xx) {
            Scalar q = 0.25 * g[static_cast<int64_t>(y) * wo + xx];
            xg[static_cast<int64_t>(2 * y) * w + 2 * xx] += q;
            xg[static_cast<int64_t>(2 * y) * w + 2 * xx + 1] += q;
            xg[static_cast<int64_t>(2 * y + 1) * w + 2 * xx] += q;
            xg[static_cast<int64_t>(2 * y + 1) * w + 2 * xx + 1] += q;
          }
      }
    };
  }
  return out;
}

Var upsample2_bilinear(Var x) {
  if (x.shape().size() != 3) throw std::invalid_argument("upsample2_bilinear: rank-3 expected");
  int c = x.dim(0), h = x.dim(1), w = x.dim(2), ho = 2 * h, wo = 2 * w;
  Var out = x.tape->make({c, ho, wo}, x.n->needs_grad);
  out.n->vown = Arr(static_cast<int64_t>(c) * ho * wo);
  auto coords = [](int i, int n) {
    Scalar u = (i + 0.5) / 2.0 - 0.5;
    if (u < 0) u = 0;
    if (u > n - 1) u = n - 1;
    int i0 = static_cast<int>(u);
    if (i0 > n - 2) i0 = n >= 2 ? n - 2 : 0;
    return std::pair<int, Scalar>(i0, u - i0);
  };
  for (int cc = 0; cc < c; ++cc) {
    const Scalar* src = x.v().data() + static_cast<int64_t>(cc) * h * w;
    Scalar* dst = out.n->vown.data() + static_cast<int64_t>(cc) * ho * wo;
    for (int y = 0; y < ho; ++y) {
      auto [y0, fy] = coords(y, h);
      int y1 = h >= 2 ? y0 + 1 : y0;
      for (int xx = 0; xx < wo; ++xx) {
        auto [x0, fx] = coords(xx, w);
        int x1 = w >= 2 ? x0 + 1 : x0;
        dst[static_cast<int64_t>(y) * wo + xx] =
            (1 - fy) * ((1 - fx) * src[static_cast<int64_t>(y0) * w + x0] +
                        fx * src[static_cast<int64_t>(y0) * w + x1]) +
            fy * ((1 - fx) * src[static_cast<int64_t>(y1) * w + x0] +
                  fx * src[static_cast<int64_t>(y1) * w + x1]);
      }
    }
  }
  if (out.n->needs_grad) {
    Node *xn = x.n, *on = out.n;
    on->backprop = [xn, on, c, h, w, ho, wo, coords] {
      xn->ensure_grad();
      for (int cc = 0; cc < c; ++cc) {
        Scalar* xg = xn->grad.data() + static_cast<int64_t>(cc) * h * w;
        const Scalar* g = on->grad.data() + static_cast<int64_t>(cc) * ho * wo;
        for (int y = 0; y < ho; ++y) {
          auto [y0, fy] = coords(y, h);
          int y1 = h >= 2 ? y0 + 1 : y0;
          for (int xx = 0; xx < wo; ++xx) {
            auto [x0, fx] = coords(xx, w);
            int x1 = w >= 2 ? x0 + 1 : x0;
            Scalar gv = g[static_cast<int64_t>(y) * wo + xx];
            xg[static_cast<int64_t>(y0) * w + x0] += (1 - fy) * (1 - fx) * gv;
            xg[static_cast<int64_t>(y0) * w + x1] += (1 - fy) * fx * gv;
            xg[static_cast<int64_t>(y1) * w + x0] += fy * (1 - fx) * gv;
            xg[static_cast<int64_t>(y1) * w + x1] += fy * fx * gv;
          }
        }
      }
    };
  }
  return out;
}

}  // namespace slic
