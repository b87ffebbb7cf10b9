#include "slic/perceptual.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include "slic/digest.hpp"
#include "slic/params.hpp"

namespace slic {

namespace {

constexpr uint64_t kBankSeed = 0x51ac6d371u;

}  // namespace

const PerceptualMetric& PerceptualMetric::fallback() {
  static const PerceptualMetric m = [] {
    PerceptualMetric p;
    p.w_ = TensorData({kFeatures, 3, kKernel, kKernel});
    std::mt19937_64 rng(kBankSeed);
    int fan_in = 3 * kKernel * kKernel;
    std::normal_distribution<double> d(0.0, std::sqrt(1.0 / fan_in));
    for (int64_t i = 0; i < p.w_.v.size(); ++i) p.w_.v[i] = d(rng);
    p.b_ = Arr::Zero(kFeatures);
    return p;
  }();
  return m;
}

PerceptualMetric PerceptualMetric::from_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("PerceptualMetric: cannot open " + path);
  ParamStore store;
  store.load(f);
  PerceptualMetric p;
  const ParamBlock& w = store.at("w");
  const ParamBlock& b = store.at("b");
  if (w.shape != std::vector<int>{kFeatures, 3, kKernel, kKernel} ||
      b.shape != std::vector<int>{kFeatures})
    throw std::runtime_error("PerceptualMetric: unexpected bank shape in " + path);
  p.w_ = TensorData{w.shape, w.value};
  p.b_ = b.value;
  return p;
}

std::string PerceptualMetric::weights_digest() const {
  Sha256 h;
  h.update(w_.v.data(), sizeof(Scalar) * w_.v.size());
  h.update(b_.data(), sizeof(Scalar) * b_.size());
  auto d = h.finish();
  return hex_encode(d.data(), d.size());
}

Var PerceptualMetric::distance(Tape& t, Var a, Var b) const {
  if (a.shape() != b.shape() || a.shape().size() != 3 || a.dim(0) != 3)
    throw std::invalid_argument("PerceptualMetric: expected matching (3,H,W) inputs");
  Var wv = t.constant_ref(w_.shape, w_.v);
  Var bv = t.constant_ref({kFeatures}, b_);
  Var xa = a, xb = b;
  Var total;
  for (int s = 0; s < kScales; ++s) {
    if (s) {
      int h = xa.dim(1) & ~1, w = xa.dim(2) & ~1;
      if (h < 2 || w < 2) break;
      if (h != xa.dim(1) || w != xa.dim(2)) {
        xa = crop(xa, 0, 0, h, w);
        xb = crop(xb, 0, 0, h, w);
      }
      xa = avg_pool2(xa);
      xb = avg_pool2(xb);
    }
    Var fa = channel_l2_normalize(conv2d(xa, wv, bv, 1, kKernel / 2));
    Var fb = channel_l2_normalize(conv2d(xb, wv, bv, 1, kKernel / 2));
    Var contrib = sum(global_avg_pool(square(sub(fa, fb))));
    total = total.valid() ? add(total, contrib) : contrib;
  }
  return total;
}

double PerceptualMetric::distance(const Image& a, const Image& b) const {
  Tape t(false);
  Var av = t.constant_ref({a.c, a.h, a.w}, a.data);
  Var bv = t.constant_ref({b.c, b.h, b.w}, b.data);
  return distance(t, av, bv).item();
}

const PerceptualMetric& resolve_perceptual(const std::string& spec) {
  if (spec.empty() || spec == "fallback") return PerceptualMetric::fallback();
  static std::map<std::string, PerceptualMetric> cache;
  auto it = cache.find(spec);
  if (it != cache.end()) return it->second;

  bool is_digest = spec.size() == 64;
  for (char c : spec)
    is_digest = is_digest && std::isxdigit(static_cast<unsigned char>(c));
  std::string path = spec;
  if (is_digest) {
    const char* root = std::getenv("SLIC_CACHE");
    if (!root)
      throw std::runtime_error("resolve_perceptual: SLIC_CACHE not set for digest lookup");
    path = std::string(root) + "/perceptual/" + spec + ".bin";
    if (sha256_file_hex(path) != spec)
      throw std::runtime_error("resolve_perceptual: digest mismatch for " + path);
  }
  return cache.emplace(spec, PerceptualMetric::from_file(path)).first->second;
}

}  // namespace slic
