#include "slic/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slic {

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  int period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

Image filter3x3(const Image& im, const std::array<double, 9>& k, bool clamp) {
  Image out = Image::zeros(im.c, im.h, im.w);
  for (int c = 0; c < im.c; ++c)
    for (int y = 0; y < im.h; ++y)
      for (int x = 0; x < im.w; ++x) {
        double acc = 0;
        for (int i = -1; i <= 1; ++i)
          for (int j = -1; j <= 1; ++j)
            acc += k[static_cast<size_t>((i + 1) * 3 + j + 1)] *
                   im.at(c, reflect101(y + i, im.h), reflect101(x + j, im.w));
        out.at(c, y, x) = clamp ? std::clamp(acc, 0.0, 1.0) : acc;
      }
  return out;
}

Image gaussian_blur3(const Image& im, double sigma) {
  std::array<double, 3> w{};
  double s = 0;
  for (int d = -1; d <= 1; ++d) {
    w[static_cast<size_t>(d + 1)] = std::exp(-d * d / (2 * sigma * sigma));
    s += w[static_cast<size_t>(d + 1)];
  }
  for (auto& v : w) v /= s;
  std::array<double, 9> k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      k[static_cast<size_t>(i * 3 + j)] = w[static_cast<size_t>(i)] * w[static_cast<size_t>(j)];
  return filter3x3(im, k, true);
}

Image median3(const Image& im) {
  Image out = Image::zeros(im.c, im.h, im.w);
  std::array<double, 9> v{};
  for (int c = 0; c < im.c; ++c)
    for (int y = 0; y < im.h; ++y)
      for (int x = 0; x < im.w; ++x) {
        int n = 0;
        for (int i = -1; i <= 1; ++i)
          for (int j = -1; j <= 1; ++j)
            v[static_cast<size_t>(n++)] = im.at(c, reflect101(y + i, im.h), reflect101(x + j, im.w));
        std::nth_element(v.begin(), v.begin() + 4, v.end());
        out.at(c, y, x) = v[4];
      }
  return out;
}

Image hist_eq(const Image& im) {
  Image out = im;
  int64_t total = im.pixels();
  for (int c = 0; c < im.c; ++c) {
    std::array<int64_t, 256> hist{};
    for (int y = 0; y < im.h; ++y)
      for (int x = 0; x < im.w; ++x) {
        int v = static_cast<int>(std::lround(std::clamp(im.at(c, y, x), 0.0, 1.0) * 255.0));
        ++hist[static_cast<size_t>(v)];
      }
    std::array<int64_t, 256> cdf{};
    int64_t run = 0;
    for (int v = 0; v < 256; ++v) {
      run += hist[static_cast<size_t>(v)];
      cdf[static_cast<size_t>(v)] = run;
    }
    int64_t cdf_min = 0;
    for (int v = 0; v < 256; ++v)
      if (hist[static_cast<size_t>(v)] > 0) {
        cdf_min = cdf[static_cast<size_t>(v)];
        break;
      }
    if (total == cdf_min) continue;  // constant channel
    std::array<double, 256> lut{};
    for (int v = 0; v < 256; ++v)
      lut[static_cast<size_t>(v)] =
          std::lround(255.0 * static_cast<double>(cdf[static_cast<size_t>(v)] - cdf_min) /
                      static_cast<double>(total - cdf_min)) /
          255.0;
    for (int y = 0; y < im.h; ++y)
      for (int x = 0; x < im.w; ++x) {
        int v = static_cast<int>(std::lround(std::clamp(im.at(c, y, x), 0.0, 1.0) * 255.0));
        out.at(c, y, x) = lut[static_cast<size_t>(v)];
      }
  }
  return out;
}

Image lighten_lab(const Image& im, double factor) {
  Image lab = rgb_to_lab(im);
  for (int y = 0; y < im.h; ++y)
    for (int x = 0; x < im.w; ++x)
      lab.at(0, y, x) = std::clamp(lab.at(0, y, x) * factor, 0.0, 100.0);
  return lab_to_rgb(lab);
}

Image warp_image(const Image& im, const AffineCoeffs& m) {
  Tape t(false);
  Var x = t.constant_ref({im.c, im.h, im.w}, im.data);
  Var y = affine_warp(x, m);
  Image out = im;
  out.data = y.v();
  // resampling can overshoot marginally at reflected borders
  out.data = out.data.min(1.0).max(0.0);
  return out;
}

}  // namespace

std::string edit_name(const EditSpec& spec) {
  switch (spec.kind) {
    case EditKind::kIdentity: return "identity";
    case EditKind::kCopy: return "copy";
    case EditKind::kGaussianBlur: return "gaussian-blur";
    case EditKind::kMedianFilter: return "median-filter";
    case EditKind::kSharpen: return "sharpen";
    case EditKind::kLighten: return "lighten";
    case EditKind::kHistEq: return "hist-eq";
    case EditKind::kAffine: return "affine";
    case EditKind::kJpeg: return "jpeg";
    case EditKind::kCropout: return "cropout";
    case EditKind::kDropout: return "dropout";
  }
  return "unknown";
}

EditSpec make_edit(const std::string& kind_name) {
  EditSpec s;
  if (kind_name == "identity") s.kind = EditKind::kIdentity;
  else if (kind_name == "copy") s.kind = EditKind::kCopy;
  else if (kind_name == "gaussian-blur") s.kind = EditKind::kGaussianBlur;
  else if (kind_name == "median-filter") s.kind = EditKind::kMedianFilter;
  else if (kind_name == "sharpen") s.kind = EditKind::kSharpen;
  else if (kind_name == "lighten") s.kind = EditKind::kLighten;
  else if (kind_name == "hist-eq") s.kind = EditKind::kHistEq;
  else if (kind_name == "affine") s.kind = EditKind::kAffine;
  else if (kind_name == "jpeg") s.kind = EditKind::kJpeg;
  else if (kind_name == "cropout") s.kind = EditKind::kCropout;
  else if (kind_name == "dropout") s.kind = EditKind::kDropout;
  else throw std::invalid_argument("make_edit: unknown kind " + kind_name);
  return s;
}

std::vector<EditSpec> standard_edits() {
  std::vector<EditSpec> out;
  for (const char* k :
       {"copy", "gaussian-blur", "median-filter", "sharpen", "lighten", "hist-eq", "affine",
        "jpeg"})
    out.push_back(make_edit(k));
  return out;
}

AffineCoeffs affine_about_center(int h, int w, double angle_deg, double tx, double ty,
                                 double scale) {
  if (scale <= 0) throw std::invalid_argument("affine: non-positive scale");
  double th = angle_deg * M_PI / 180.0;
  double c = std::cos(th), s = std::sin(th);
  double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  // Forward map: dst = S R (src - center) + center + t. Invert for sampling.
  AffineCoeffs m;
  m.a = c / scale;
  m.b = s / scale;
  m.d = -s / scale;
  m.e = c / scale;
  m.c = cx - (c * (cx + tx) + s * (cy + ty)) / scale;
  m.f = cy - (-s * (cx + tx) + c * (cy + ty)) / scale;
  return m;
}

Image apply_edit(const Image& im, const EditSpec& spec, const Image* cover) {
  switch (spec.kind) {
    case EditKind::kIdentity:
      return im;
    case EditKind::kCopy: {
      if (spec.canvas_scale < 1.0) throw std::invalid_argument("copy: canvas smaller than image");
      int ch = static_cast<int>(std::lround(im.h * spec.canvas_scale));
      int cw = static_cast<int>(std::lround(im.w * spec.canvas_scale));
      Image out = Image::zeros(im.c, ch, cw, 0.5);
      for (int c = 0; c < im.c; ++c)
        for (int y = 0; y < im.h; ++y)
          for (int x = 0; x < im.w; ++x) out.at(c, y, x) = im.at(c, y, x);
      return out;
    }
    case EditKind::kGaussianBlur:
      if (spec.blur_sigma <= 0) throw std::invalid_argument("gaussian-blur: sigma must be > 0");
      return gaussian_blur3(im, spec.blur_sigma);
    case EditKind::kMedianFilter:
      return median3(im);
    case EditKind::kSharpen:
      return filter3x3(im, {0, -1, 0, -1, 5, -1, 0, -1, 0}, true);
    case EditKind::kLighten:
      if (spec.lighten_factor <= 0) throw std::invalid_argument("lighten: factor must be > 0");
      return lighten_lab(im, spec.lighten_factor);
    case EditKind::kHistEq:
      return hist_eq(im);
    case EditKind::kAffine:
      return warp_image(im, affine_about_center(im.h, im.w, spec.angle_deg, spec.translate_px,
                                                spec.translate_px, spec.scale));
    case EditKind::kJpeg: {
      if (spec.jpeg_quality < 1 || spec.jpeg_quality > 100)
        throw std::invalid_argument("jpeg: quality out of range");
      auto bytes = encode_jpeg(im, spec.jpeg_quality);
      return decode_jpeg(bytes.data(), bytes.size());
    }
    case EditKind::kCropout: {
      if (!cover || cover->h != im.h || cover->w != im.w)
        throw std::invalid_argument("cropout: cover with matching dims required");
      if (spec.area < 0 || spec.area > 1) throw std::invalid_argument("cropout: bad area");
      Image out = im;
      if (spec.area == 0) return out;
      double side = std::sqrt(spec.area);
      int rh = std::min(im.h, std::max(1, static_cast<int>(std::lround(side * im.h))));
      int rw = std::min(im.w, std::max(1, static_cast<int>(std::lround(side * im.w))));
      std::mt19937_64 rng(spec.seed);
      int y0 = std::uniform_int_distribution<int>(0, im.h - rh)(rng);
      int x0 = std::uniform_int_distribution<int>(0, im.w - rw)(rng);
      for (int c = 0; c < im.c; ++c)
        for (int y = y0; y < y0 + rh; ++y)
          for (int x = x0; x < x0 + rw; ++x) out.at(c, y, x) = cover->at(c, y, x);
      return out;
    }
    case EditKind::kDropout: {
      if (!cover || cover->h != im.h || cover->w != im.w)
        throw std::invalid_argument("dropout: cover with matching dims required");
      if (spec.prob < 0 || spec.prob > 1) throw std::invalid_argument("dropout: bad probability");
      Image out = im;
      if (spec.prob == 0) return out;
      std::mt19937_64 rng(spec.seed);
      std::bernoulli_distribution drop(spec.prob);
      for (int y = 0; y < im.h; ++y)
        for (int x = 0; x < im.w; ++x)
          if (drop(rng))
            for (int c = 0; c < im.c; ++c) out.at(c, y, x) = cover->at(c, y, x);
      return out;
    }
  }
  throw std::logic_error("apply_edit: unhandled kind");
}

TrainAttack sample_train_attack(std::mt19937_64& rng, int h, int w) {
  TrainAttack atk;
  atk.kind = static_cast<TrainAttack::Kind>(std::uniform_int_distribution<int>(0, 2)(rng));
  if (atk.kind == TrainAttack::kRandomAffine) {
    std::uniform_real_distribution<double> ang(-10.0, 10.0), tr(-0.1, 0.1), sc(0.9, 1.1);
    double a = ang(rng);
    double tx = tr(rng) * w, ty = tr(rng) * h;
    double s = sc(rng);
    atk.coeffs = affine_about_center(h, w, a, tx, ty, s);
  } else if (atk.kind == TrainAttack::kDiffJpeg) {
    atk.quality = std::uniform_int_distribution<int>(70, 95)(rng);
  }
  return atk;
}

Var apply_train_attack(Tape& t, Var x, const TrainAttack& atk) {
  switch (atk.kind) {
    case TrainAttack::kNone: return x;
    case TrainAttack::kRandomAffine: return affine_warp(x, atk.coeffs);
    case TrainAttack::kDiffJpeg: return diff_jpeg(t, x, atk.quality);
  }
  throw std::logic_error("apply_train_attack: unhandled kind");
}

}  // namespace slic
