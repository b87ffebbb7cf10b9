#pragma once

#include <cstdint>
#include <vector>

#include "slic/image.hpp"
#include "slic/nn_ops.hpp"

namespace slic {

// Quality metrics on [0,1] images. PSNR is capped at 100 dB so identical
// images compare cleanly.
double psnr(const Image& a, const Image& b);
double mse_value(const Image& a, const Image& b);
double mae255(const Image& a, const Image& b);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), valid positions
// only, averaged over channels. Needs dims of at least 11.
double ssim(const Image& a, const Image& b);

// Mean binary cross-entropy between logits and {0,1} targets, numerically
// stable for large |logit|.
double bce_with_logits_value(const Arr& logits, const Arr& targets);

// Fraction of mismatched bits.
double bit_error_rate(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b);

// Graph variants (values agree with the plain versions). psnr_var returns
// the 100 dB cap as a constant when the difference underflows.
Var psnr_var(Var a, Var b);
Var ssim_var(Var a, Var b);

}  // namespace slic
