#include "slic/bitstream.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace slic {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'C', '1'};

template <typename T>
void put(std::vector<uint8_t>& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

template <typename T>
T get(const uint8_t*& p, const uint8_t* end) {
  if (static_cast<size_t>(end - p) < sizeof(T))
    throw std::runtime_error("bitstream: truncated header");
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
  p += sizeof(T);
  return v;
}

}  // namespace

std::vector<uint8_t> serialize_bitstream(const SlicBitstream& bs) {
  std::vector<uint8_t> out;
  out.reserve(57 + bs.payload.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put<uint16_t>(out, bs.version);
  out.insert(out.end(), bs.model_hash.begin(), bs.model_hash.end());
  put<uint32_t>(out, bs.image_h);
  put<uint32_t>(out, bs.image_w);
  put<uint16_t>(out, bs.latent_c);
  put<uint16_t>(out, bs.latent_h);
  put<uint16_t>(out, bs.latent_w);
  put<uint8_t>(out, bs.flags);
  put<uint64_t>(out, static_cast<uint64_t>(bs.payload.size()));
  out.insert(out.end(), bs.payload.begin(), bs.payload.end());
  return out;
}

SlicBitstream parse_bitstream(const uint8_t* data, size_t n) {
  const uint8_t* p = data;
  const uint8_t* end = data + n;
  if (n < 4 || std::memcmp(p, kMagic, 4) != 0)
    throw std::runtime_error("bitstream: bad magic");
  p += 4;
  SlicBitstream bs;
  bs.version = get<uint16_t>(p, end);
  if (bs.version != kBitstreamVersion)
    throw std::runtime_error("bitstream: unsupported version " + std::to_string(bs.version));
  if (static_cast<size_t>(end - p) < 32) throw std::runtime_error("bitstream: truncated hash");
  std::memcpy(bs.model_hash.data(), p, 32);
  p += 32;
  bs.image_h = get<uint32_t>(p, end);
  bs.image_w = get<uint32_t>(p, end);
  bs.latent_c = get<uint16_t>(p, end);
  bs.latent_h = get<uint16_t>(p, end);
  bs.latent_w = get<uint16_t>(p, end);
  bs.flags = get<uint8_t>(p, end);
  uint64_t len = get<uint64_t>(p, end);
  if (static_cast<uint64_t>(end - p) < len)
    throw std::runtime_error("bitstream: truncated payload");
  bs.payload.assign(p, p + len);
  return bs;
}

void write_bitstream(const std::string& path, const SlicBitstream& bs) {
  std::vector<uint8_t> bytes = serialize_bitstream(bs);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_bitstream: cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write_bitstream: write failed for " + path);
}

SlicBitstream read_bitstream(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_bitstream: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return parse_bitstream(bytes.data(), bytes.size());
}

}  // namespace slic
