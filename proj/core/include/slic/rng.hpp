#pragma once

#include <cstdint>
#include <random>

namespace slic {

// splitmix64 step, used to derive independent seed streams from one master
// seed. Stream ids are small constants; epoch/index mixing keeps resumed
// training aligned with an uninterrupted run.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index = 0) {
  return mix64(mix64(master ^ mix64(stream)) ^ mix64(index + 0x51ed2701ull));
}

inline std::mt19937_64 make_rng(uint64_t master, uint64_t stream, uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, stream, index));
}

// Fixed stream ids (recorded here so logs and manifests stay meaningful).
namespace rng_stream {
constexpr uint64_t kInit = 1;       // parameter initialization
constexpr uint64_t kSplit = 2;      // dataset train/val split
constexpr uint64_t kCrops = 3;      // crop positions per epoch
constexpr uint64_t kMessages = 4;   // payload bits per sample
constexpr uint64_t kQuantNoise = 5; // train-time quantization noise
constexpr uint64_t kAttack = 6;     // attack sampling per batch item
constexpr uint64_t kEval = 7;       // evaluation-side randomness
constexpr uint64_t kShuffle = 8;    // per-epoch batch ordering
}  // namespace rng_stream

}  // namespace slic
