#include "slic/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace slic {

namespace {

void require_same_dims(const Image& a, const Image& b, const char* what) {
  if (a.c != b.c || a.h != b.h || a.w != b.w)
    throw std::invalid_argument(std::string(what) + ": image dims differ");
}

constexpr int kWin = 11;
constexpr double kSigma = 1.5;

const std::array<double, kWin>& gauss_kernel() {
  static const std::array<double, kWin> k = [] {
    std::array<double, kWin> g{};
    double sum = 0;
    for (int i = 0; i < kWin; ++i) {
      double d = i - (kWin - 1) / 2.0;
      g[static_cast<size_t>(i)] = std::exp(-d * d / (2 * kSigma * kSigma));
      sum += g[static_cast<size_t>(i)];
    }
    for (auto& v : g) v /= sum;
    return g;
  }();
  return k;
}

// Separable valid Gaussian filter of one plane: (h,w) -> (h-10, w-10).
Mat gauss_valid(const Mat& x) {
  const auto& k = gauss_kernel();
  Mat rows(x.rows(), x.cols() - kWin + 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      double acc = 0;
      for (int i = 0; i < kWin; ++i) acc += k[static_cast<size_t>(i)] * x(r, c + i);
      rows(r, c) = acc;
    }
  Mat out(x.rows() - kWin + 1, rows.cols());
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      double acc = 0;
      for (int i = 0; i < kWin; ++i) acc += k[static_cast<size_t>(i)] * rows(r + i, c);
      out(r, c) = acc;
    }
  return out;
}

Mat plane_of(const Image& im, int c) {
  Mat m(im.h, im.w);
  for (int y = 0; y < im.h; ++y)
    for (int x = 0; x < im.w; ++x) m(y, x) = im.at(c, y, x);
  return m;
}

}  // namespace

double mse_value(const Image& a, const Image& b) {
  require_same_dims(a, b, "mse");
  return (a.data - b.data).square().mean();
}

double psnr(const Image& a, const Image& b) {
  double m = mse_value(a, b);
  if (m <= 1e-10) return 100.0;
  return std::min(100.0, 10.0 * std::log10(1.0 / m));
}

double mae255(const Image& a, const Image& b) {
  require_same_dims(a, b, "mae");
  return 255.0 * (a.data - b.data).abs().mean();
}

double ssim(const Image& a, const Image& b) {
  require_same_dims(a, b, "ssim");
  if (a.h < kWin || a.w < kWin) throw std::invalid_argument("ssim: image smaller than window");
  constexpr double kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;  // dynamic range 1
  double total = 0;
  for (int c = 0; c < a.c; ++c) {
    Mat x = plane_of(a, c), y = plane_of(b, c);
    Mat mx = gauss_valid(x), my = gauss_valid(y);
    Mat mxx = gauss_valid(Mat(x.cwiseProduct(x)));
    Mat myy = gauss_valid(Mat(y.cwiseProduct(y)));
    Mat mxy = gauss_valid(Mat(x.cwiseProduct(y)));
    double acc = 0;
    for (Eigen::Index r = 0; r < mx.rows(); ++r)
      for (Eigen::Index cc = 0; cc < mx.cols(); ++cc) {
        double ux = mx(r, cc), uy = my(r, cc);
        double vx = mxx(r, cc) - ux * ux;
        double vy = myy(r, cc) - uy * uy;
        double cxy = mxy(r, cc) - ux * uy;
        acc += ((2 * ux * uy + kC1) * (2 * cxy + kC2)) /
               ((ux * ux + uy * uy + kC1) * (vx + vy + kC2));
      }
    total += acc / static_cast<double>(mx.rows() * mx.cols());
  }
  return total / a.c;
}

double bce_with_logits_value(const Arr& logits, const Arr& targets) {
  if (logits.size() != targets.size() || logits.size() == 0)
    throw std::invalid_argument("bce: size mismatch");
  double acc = 0;
  for (int64_t i = 0; i < logits.size(); ++i) {
    double z = logits[i], t = targets[i];
    acc += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
  }
  return acc / static_cast<double>(logits.size());
}

double bit_error_rate(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("ber: size mismatch");
  int64_t diff = 0;
  for (size_t i = 0; i < a.size(); ++i) diff += (a[i] != 0) != (b[i] != 0);
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

Var psnr_var(Var a, Var b) {
  Var m = mse(a, b);
  if (m.item() <= 1e-10) return a.tape->constant(TensorData{{1}, Arr::Constant(1, 100.0)});
  Var p = scale(log_op(m), -10.0 / std::log(10.0));
  if (p.item() > 100.0) return a.tape->constant(TensorData{{1}, Arr::Constant(1, 100.0)});
  return p;
}

Var ssim_var(Var a, Var b) {
  if (!same_shape(a.shape(), b.shape()) || a.shape().size() != 3)
    throw std::invalid_argument("ssim_var: matching rank-3 shapes required");
  constexpr double kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;
  const auto& k1 = gauss_kernel();
  TensorData g({kWin, kWin});
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j)
      g.v[i * kWin + j] = k1[static_cast<size_t>(i)] * k1[static_cast<size_t>(j)];

  Var mx = filter2d_valid(a, g), my = filter2d_valid(b, g);
  Var sxx = sub(filter2d_valid(square(a), g), mul(mx, mx));
  Var syy = sub(filter2d_valid(square(b), g), mul(my, my));
  Var sxy = sub(filter2d_valid(mul(a, b), g), mul(mx, my));
  Var num = mul(add_scalar(scale(mul(mx, my), 2.0), kC1), add_scalar(scale(sxy, 2.0), kC2));
  Var den = mul(add_scalar(add(square(mx), square(my)), kC1),
                add_scalar(add(sxx, syy), kC2));
  return mean(div(num, den));
}

}  // namespace slic
