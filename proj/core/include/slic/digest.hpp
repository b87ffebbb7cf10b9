#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace slic {

// Streaming SHA-256 (OpenSSL EVP under the hood).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, size_t n);
  void update(const std::string& s) { update(s.data(), s.size()); }
  std::array<uint8_t, 32> finish();

 private:
  void* ctx_;
};

std::array<uint8_t, 32> sha256_bytes(const void* data, size_t n);
std::string sha256_hex(const void* data, size_t n);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);

std::string hex_encode(const uint8_t* data, size_t n);
std::vector<uint8_t> hex_decode(const std::string& hex);  // throws on bad input

}  // namespace slic
