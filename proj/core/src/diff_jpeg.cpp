#include <algorithm>
#include <stdexcept>

#include "slic/attacks.hpp"

namespace slic {

namespace {

// IJG annex-K base tables, row-major.
const int kLumaBase[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};
const int kChromaBase[64] = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99};

// (1,h,w) constant with q (or 1/q) tiled over 8x8 blocks.
TensorData tiled_table(const std::array<int, 64>& q, int h, int w, bool inverse) {
  TensorData t({1, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = q[static_cast<size_t>((y % 8) * 8 + x % 8)];
      t.v[static_cast<int64_t>(y) * w + x] = inverse ? 1.0 / v : v;
    }
  return t;
}

// One plane through quantize/dequantize in the DCT domain.
Var jpeg_plane(Tape& t, Var plane, const std::array<int, 64>& q) {
  int h = plane.dim(1), w = plane.dim(2);
  Var f = block_dct8(add_scalar(plane, -128.0), false);
  Var scaled = mul(f, t.constant(tiled_table(q, h, w, true)));
  Var rounded = smooth_round(scaled);
  Var deq = mul(rounded, t.constant(tiled_table(q, h, w, false)));
  return add_scalar(block_dct8(deq, true), 128.0);
}

}  // namespace

std::array<int, 64> jpeg_quant_table(int quality, bool chroma) {
  if (quality < 1 || quality > 100) throw std::invalid_argument("jpeg_quant_table: bad quality");
  int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  const int* base = chroma ? kChromaBase : kLumaBase;
  std::array<int, 64> out{};
  for (int i = 0; i < 64; ++i)
    out[static_cast<size_t>(i)] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
  return out;
}

Var diff_jpeg(Tape& t, Var x, int quality) {
  if (x.shape().size() != 3 || x.dim(0) != 3 || x.dim(1) % 16 || x.dim(2) % 16)
    throw std::invalid_argument("diff_jpeg: (3,H,W) with H,W multiples of 16 required");
  // JPEG YCbCr on the 0..255 scale, chroma centered at 128.
  Eigen::Matrix3d fwd;
  fwd << 0.299, 0.587, 0.114,  //
      -0.168736, -0.331264, 0.5,  //
      0.5, -0.418688, -0.081312;
  Eigen::Vector3d fwd_off(0.0, 128.0, 128.0);
  Var ycc = channel_mix(scale(x, 255.0), fwd, fwd_off);

  auto qy = jpeg_quant_table(quality, false);
  auto qc = jpeg_quant_table(quality, true);
  Var yp = jpeg_plane(t, slice_channels(ycc, 0, 1), qy);
  Var cb = upsample2_bilinear(jpeg_plane(t, avg_pool2(slice_channels(ycc, 1, 1)), qc));
  Var cr = upsample2_bilinear(jpeg_plane(t, avg_pool2(slice_channels(ycc, 2, 1)), qc));
  Var merged = concat_channels({yp, cb, cr});

  Eigen::Matrix3d inv;
  inv << 1.0, 0.0, 1.402,  //
      1.0, -0.344136, -0.714136,  //
      1.0, 1.772, 0.0;
  Eigen::Vector3d inv_off = -(inv * fwd_off);
  Var rgb = channel_mix(merged, inv, inv_off);
  return clamp01(scale(rgb, 1.0 / 255.0));
}

}  // namespace slic
