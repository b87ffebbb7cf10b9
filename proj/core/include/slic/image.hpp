#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slic/tensor.hpp"

namespace slic {

// Planar (c,h,w) image, values nominally in [0,1]. All pipeline images are
// 3-channel RGB; loaders expand grayscale and strip alpha.
struct Image {
  int c = 0, h = 0, w = 0;
  Arr data;

  static Image zeros(int c, int h, int w, Scalar fill = 0.0) {
    Image im;
    im.c = c;
    im.h = h;
    im.w = w;
    im.data = Arr::Constant(static_cast<int64_t>(c) * h * w, fill);
    return im;
  }
  static Image from_tensor(const TensorData& t) {
    Image im;
    im.c = t.dim(0);
    im.h = t.dim(1);
    im.w = t.dim(2);
    im.data = t.v;
    return im;
  }

  Scalar& at(int cc, int y, int x) { return data[(static_cast<int64_t>(cc) * h + y) * w + x]; }
  Scalar at(int cc, int y, int x) const {
    return data[(static_cast<int64_t>(cc) * h + y) * w + x];
  }
  TensorData tensor() const { return TensorData{{c, h, w}, data}; }
  int64_t pixels() const { return static_cast<int64_t>(h) * w; }
};

// Interleaved 8-bit conversions. to_u8 clamps then rounds half away from zero.
Image image_from_u8(const uint8_t* interleaved, int c, int h, int w);
std::vector<uint8_t> image_to_u8(const Image& im);
Image quantize_u8(const Image& im);  // round trip through 8-bit

// sRGB (D65) <-> CIELAB, both sides in [0,1] RGB; L in [0,100], a/b unbounded.
Image rgb_to_lab(const Image& im);
Image lab_to_rgb(const Image& lab);

// PNG via libpng; always yields 3-channel RGB on read.
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& im);

// JPEG via libjpeg. quality follows the usual 1..100 scale.
std::vector<uint8_t> encode_jpeg(const Image& im, int quality);
Image decode_jpeg(const uint8_t* data, size_t n);
Image read_jpeg(const std::string& path);
void write_jpeg(const std::string& path, const Image& im, int quality);

// Dispatch on extension (.png / .jpg / .jpeg, case-insensitive).
Image read_image(const std::string& path);

}  // namespace slic
