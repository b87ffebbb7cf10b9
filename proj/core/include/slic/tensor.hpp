#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace slic {

// All numeric work runs in double precision. Keeps finite-difference
// gradient checks tight and bitstreams reproducible across runs.
using Scalar = double;
using Arr = Eigen::ArrayXd;
using Mat = Eigen::MatrixXd;

using MapMat = Eigen::Map<Mat>;
using MapRowMat = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using CMapRowMat =
    Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Dense tensor with a small dynamic shape, flat row-major storage.
// Images are (3,H,W), latents (C,h,w), vectors (n).
struct TensorData {
  std::vector<int> shape;
  Arr v;

  TensorData() = default;
  explicit TensorData(std::vector<int> s) : shape(std::move(s)) {
    v = Arr::Zero(count(shape));
  }
  TensorData(std::vector<int> s, Arr values) : shape(std::move(s)), v(std::move(values)) {
    if (v.size() != count(shape)) throw std::invalid_argument("TensorData: shape/value size mismatch");
  }

  static int64_t count(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
  }

  int64_t size() const { return v.size(); }
  int dim(int i) const { return shape.at(static_cast<size_t>(i)); }
  int rank() const { return static_cast<int>(shape.size()); }

  // (c,y,x) accessor for rank-3 tensors
  Scalar& at(int c, int y, int x) {
    return v[(static_cast<int64_t>(c) * shape[1] + y) * shape[2] + x];
  }
  Scalar at(int c, int y, int x) const {
    return v[(static_cast<int64_t>(c) * shape[1] + y) * shape[2] + x];
  }
};

inline bool same_shape(const std::vector<int>& a, const std::vector<int>& b) { return a == b; }

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

inline void require_shape(const TensorData& t, const std::vector<int>& s, const char* what) {
  if (!same_shape(t.shape, s))
    throw std::invalid_argument(std::string(what) + ": expected shape " + shape_str(s) + ", got " +
                                shape_str(t.shape));
}

}  // namespace slic
