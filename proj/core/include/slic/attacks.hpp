#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "slic/image.hpp"
#include "slic/nn_ops.hpp"

namespace slic {

// Test-time editing operations (the Table-1 attack set plus the sweep-only
// cropout/dropout) and the train-time differentiable attacker.

enum class EditKind {
  kIdentity,
  kCopy,          // paste onto a larger mid-gray canvas, top-left
  kGaussianBlur,  // 3x3
  kMedianFilter,  // 3x3
  kSharpen,
  kLighten,  // +50% L in CIELAB
  kHistEq,   // per RGB channel
  kAffine,   // rotate/translate/scale, bilinear, reflect border
  kJpeg,     // real baseline JFIF round trip
  kCropout,  // random rectangle replaced by the cover reconstruction
  kDropout,  // random pixels replaced by the cover reconstruction
};

struct EditSpec {
  EditKind kind = EditKind::kIdentity;
  double canvas_scale = 1.5;
  double blur_sigma = 1.0;
  double lighten_factor = 1.5;
  double angle_deg = 5.0;
  double translate_px = 5.0;
  double scale = 0.95;
  int jpeg_quality = 80;
  double area = 0.1;  // cropout: fraction of pixels replaced
  double prob = 0.1;  // dropout: per-pixel replacement probability
  uint64_t seed = 0;  // placement randomness for cropout/dropout
};

std::string edit_name(const EditSpec& spec);
EditSpec make_edit(const std::string& kind_name);  // defaults per kind, throws on unknown
std::vector<EditSpec> standard_edits();            // the eight Table-1 edits in order

// cover: replacement source for cropout/dropout (must match dims there).
Image apply_edit(const Image& im, const EditSpec& spec, const Image* cover = nullptr);

// Inverse-mapping coefficients for "rotate by angle about the center, scale,
// then translate by (tx,ty) pixels", for use with affine_warp.
AffineCoeffs affine_about_center(int h, int w, double angle_deg, double tx, double ty,
                                 double scale);

// Train-time attacker u: per batch one of identity, random affine
// (rotation -10..10 deg, translation 0..10% per axis, scale 0.9..1.1) or
// differentiable JPEG (quality 70..95).
struct TrainAttack {
  enum Kind { kNone = 0, kRandomAffine = 1, kDiffJpeg = 2 };
  Kind kind = kNone;
  AffineCoeffs coeffs;
  int quality = 80;
};

TrainAttack sample_train_attack(std::mt19937_64& rng, int h, int w);
Var apply_train_attack(Tape& t, Var x, const TrainAttack& atk);

// Differentiable JPEG: 8x8 DCT, quality-scaled tables, smooth rounding,
// 4:2:0 chroma. Dims must be multiples of 16.
Var diff_jpeg(Tape& t, Var x, int quality);
std::array<int, 64> jpeg_quant_table(int quality, bool chroma);

}  // namespace slic
