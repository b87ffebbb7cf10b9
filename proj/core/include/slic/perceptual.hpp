#pragma once

#include <string>

#include "slic/image.hpp"
#include "slic/nn_ops.hpp"

namespace slic {

// Differentiable perceptual distance: a fixed (non-trained) 3->64 conv bank
// applied at three scales (1, 1/2, 1/4), channel-normalized features,
// squared differences averaged over positions, summed over channels and
// scales. The default bank is seeded Gaussian noise, which already
// correlates with perceptual difference far better than pixel MSE; a bank
// trained elsewhere can be loaded from a weight file instead.
class PerceptualMetric {
 public:
  static constexpr int kFeatures = 64, kKernel = 5, kScales = 3;

  // Deterministic seeded bank (the built-in default).
  static const PerceptualMetric& fallback();

  // Weight file: ParamStore blob with blocks "w" (64,3,5,5) and "b" (64).
  static PerceptualMetric from_file(const std::string& path);

  double distance(const Image& a, const Image& b) const;
  Var distance(Tape& t, Var a, Var b) const;

  std::string weights_digest() const;

 private:
  PerceptualMetric() = default;
  TensorData w_;
  Arr b_;
};

// Resolves a config value: empty or "fallback" gives the seeded bank; a
// 64-digit hex digest looks up $SLIC_CACHE/perceptual/<digest>.bin and
// verifies the file hash; anything else is treated as a path.
const PerceptualMetric& resolve_perceptual(const std::string& spec);

}  // namespace slic
