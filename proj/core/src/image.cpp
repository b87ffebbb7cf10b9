#include "slic/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slic {

Image image_from_u8(const uint8_t* interleaved, int c, int h, int w) {
  Image im = Image::zeros(c, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int cc = 0; cc < c; ++cc)
        im.at(cc, y, x) = interleaved[(static_cast<int64_t>(y) * w + x) * c + cc] / 255.0;
  return im;
}

std::vector<uint8_t> image_to_u8(const Image& im) {
  std::vector<uint8_t> out(static_cast<size_t>(im.c) * im.h * im.w);
  for (int y = 0; y < im.h; ++y)
    for (int x = 0; x < im.w; ++x)
      for (int cc = 0; cc < im.c; ++cc) {
        Scalar v = std::clamp(im.at(cc, y, x), 0.0, 1.0) * 255.0;
        out[(static_cast<int64_t>(y) * im.w + x) * im.c + cc] =
            static_cast<uint8_t>(std::lround(v));
      }
  return out;
}

Image quantize_u8(const Image& im) {
  Image out = im;
  out.data = ((im.data.min(1.0).max(0.0) * 255.0).round()) / 255.0;
  return out;
}

namespace {

Scalar srgb_to_linear(Scalar v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

Scalar linear_to_srgb(Scalar v) {
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

Scalar lab_f(Scalar t) {
  constexpr Scalar kDelta = 6.0 / 29.0;
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3 * kDelta * kDelta) + 4.0 / 29.0;
}

Scalar lab_finv(Scalar t) {
  constexpr Scalar kDelta = 6.0 / 29.0;
  return t > kDelta ? t * t * t : 3 * kDelta * kDelta * (t - 4.0 / 29.0);
}

// D65 reference white.
constexpr Scalar kXn = 0.95047, kYn = 1.0, kZn = 1.08883;

}  // namespace

Image rgb_to_lab(const Image& im) {
  if (im.c != 3) throw std::invalid_argument("rgb_to_lab: 3 channels expected");
  Image out = Image::zeros(3, im.h, im.w);
  for (int y = 0; y < im.h; ++y)
    for (int x = 0; x < im.w; ++x) {
      Scalar r = srgb_to_linear(std::clamp(im.at(0, y, x), 0.0, 1.0));
      Scalar g = srgb_to_linear(std::clamp(im.at(1, y, x), 0.0, 1.0));
      Scalar b = srgb_to_linear(std::clamp(im.at(2, y, x), 0.0, 1.0));
      Scalar X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
      Scalar Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
      Scalar Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
      Scalar fx = lab_f(X / kXn), fy = lab_f(Y / kYn), fz = lab_f(Z / kZn);
      out.at(0, y, x) = 116.0 * fy - 16.0;
      out.at(1, y, x) = 500.0 * (fx - fy);
      out.at(2, y, x) = 200.0 * (fy - fz);
    }
  return out;
}

Image lab_to_rgb(const Image& lab) {
  if (lab.c != 3) throw std::invalid_argument("lab_to_rgb: 3 channels expected");
  Image out = Image::zeros(3, lab.h, lab.w);
  for (int y = 0; y < lab.h; ++y)
    for (int x = 0; x < lab.w; ++x) {
      Scalar L = lab.at(0, y, x), a = lab.at(1, y, x), b = lab.at(2, y, x);
      Scalar fy = (L + 16.0) / 116.0;
      Scalar fx = fy + a / 500.0;
      Scalar fz = fy - b / 200.0;
      Scalar X = kXn * lab_finv(fx), Y = kYn * lab_finv(fy), Z = kZn * lab_finv(fz);
      Scalar r = 3.2404542 * X - 1.5371385 * Y - 0.4985314 * Z;
      Scalar g = -0.9692660 * X + 1.8760108 * Y + 0.0415560 * Z;
      Scalar bb = 0.0556434 * X - 0.2040259 * Y + 1.0572252 * Z;
      out.at(0, y, x) = std::clamp(linear_to_srgb(std::clamp(r, 0.0, 1.0)), 0.0, 1.0);
      out.at(1, y, x) = std::clamp(linear_to_srgb(std::clamp(g, 0.0, 1.0)), 0.0, 1.0);
      out.at(2, y, x) = std::clamp(linear_to_srgb(std::clamp(bb, 0.0, 1.0)), 0.0, 1.0);
    }
  return out;
}

Image read_image(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == "png") return read_png(path);
  if (ext == "jpg" || ext == "jpeg") return read_jpeg(path);
  throw std::runtime_error("read_image: unsupported extension on " + path);
}

}  // namespace slic
