#pragma once

#include "slic/autodiff.hpp"

namespace slic {

// Elementwise / reductions -------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);  // elementwise; caller keeps b away from zero
Var scale(Var a, Scalar s);
Var add_scalar(Var a, Scalar s);
Var leaky_relu(Var a, Scalar slope = 0.2);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh_op(Var a);
Var square(Var a);
Var sqrt_op(Var a, Scalar eps = 0.0);
Var log_op(Var a);  // natural log; inputs must be positive
// Clamp to [0,1]; gradient passes where the pre-clamp value was in range.
Var clamp01(Var a);
// round(x) surrogate: x - sin(2*pi*x)/(2*pi). Smooth, exact at integers.
Var smooth_round(Var a);

Var sum(Var a);
Var mean(Var a);
// mean((a-b)^2) over all elements
Var mse(Var a, Var b);
// mean over bits of BCE between logits and binary targets (logistic link)
Var bce_with_logits(Var logits, const Arr& targets);

// Shape / layout -----------------------------------------------------------

Var broadcast_chw(Var vec, int h, int w);      // (C) -> (C,h,w)
Var global_avg_pool(Var x);                    // (C,H,W) -> (C)
Var slice_channels(Var x, int c0, int len);    // (C,H,W) -> (len,H,W)
Var concat_channels(const std::vector<Var>& xs);
Var pad_reflect(Var x, int top, int bottom, int left, int right);
Var crop(Var x, int top, int left, int h, int w);
Var avg_pool2(Var x);                          // 2x2 mean, stride 2, even dims
Var upsample2_bilinear(Var x);                 // (C,h,w) -> (C,2h,2w), half-pel grid

// Linear / convolution -----------------------------------------------------

Var linear(Var x, Var w, Var b);  // x:(K) w:(M,K) b:(M) -> (M)

// x:(C,H,W) w:(O,C,kh,kw) b:(O), zero padding
Var conv2d(Var x, Var w, Var b, int stride, int pad);
// x:(C,H,W) w:(C,O,kh,kw) b:(O); output (O, (H-1)s-2p+kh+op, ...)
Var conv_transpose2d(Var x, Var w, Var b, int stride, int pad, int out_pad);
// Same fixed kernel applied to every channel independently, valid region only.
Var filter2d_valid(Var x, const TensorData& kernel);

// Geometry / transform -----------------------------------------------------

// out(xo,yo) samples in at (a*xo+b*yo+c, d*xo+e*yo+f), bilinear, reflect101.
struct AffineCoeffs {
  Scalar a = 1, b = 0, c = 0, d = 0, e = 1, f = 0;
};
Var affine_warp(Var x, const AffineCoeffs& m);

// 8x8 blockwise orthonormal DCT-II per channel; dims must be multiples of 8.
Var block_dct8(Var x, bool inverse);

// y[c] = sum_k M(c,k) x[k] + off[c], per pixel; M fixed (not differentiated).
Var channel_mix(Var x, const Eigen::Matrix3d& m, const Eigen::Vector3d& off);

// Feature normalization used by the perceptual metric:
// y = x / sqrt(sum_c x_c^2 + eps) per spatial position.
Var channel_l2_normalize(Var x, Scalar eps = 1e-6);

}  // namespace slic
