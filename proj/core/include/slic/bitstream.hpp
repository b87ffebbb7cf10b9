#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace slic {

// On-disk container: magic "SLC1", version u16, model-hash (32 bytes,
// SHA-256 of codec parameters), image H,W u32, latent C,h,w u16, flags u8
// (bit0 = watermark present), payload length u64, payload. Little-endian.
constexpr uint16_t kBitstreamVersion = 1;
constexpr uint8_t kFlagWatermark = 1;

struct SlicBitstream {
  uint16_t version = kBitstreamVersion;
  std::array<uint8_t, 32> model_hash{};
  uint32_t image_h = 0, image_w = 0;
  uint16_t latent_c = 0, latent_h = 0, latent_w = 0;
  uint8_t flags = 0;
  std::vector<uint8_t> payload;

  bool watermarked() const { return (flags & kFlagWatermark) != 0; }
};

std::vector<uint8_t> serialize_bitstream(const SlicBitstream& bs);
SlicBitstream parse_bitstream(const uint8_t* data, size_t n);
void write_bitstream(const std::string& path, const SlicBitstream& bs);
SlicBitstream read_bitstream(const std::string& path);

}  // namespace slic
