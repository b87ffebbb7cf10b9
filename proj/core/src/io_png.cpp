#include <png.h>

#include <stdexcept>

#include "slic/image.hpp"

namespace slic {

// libpng simplified API keeps this short; we always normalize to 8-bit RGB.

Image read_png(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw std::runtime_error("read_png: " + path + ": " + img.message);
  img.format = PNG_FORMAT_RGB;
  std::vector<uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("read_png: " + path + ": " + msg);
  }
  Image out = image_from_u8(buf.data(), 3, static_cast<int>(img.height),
                            static_cast<int>(img.width));
  png_image_free(&img);
  return out;
}

void write_png(const std::string& path, const Image& im) {
  if (im.c != 3) throw std::invalid_argument("write_png: 3 channels expected");
  std::vector<uint8_t> buf = image_to_u8(im);
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(im.w);
  img.height = static_cast<png_uint_32>(im.h);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("write_png: " + path + ": " + msg);
  }
}

}  // namespace slic
