#pragma once

#include <random>
#include <utility>

#include "slic/nn_ops.hpp"
#include "slic/params.hpp"

namespace slic {

// Probability floor shared by the rate estimate and the coder tables, so the
// estimated code length tracks what the range coder actually spends.
constexpr double kPmfFloor = 1.0 / 65536.0;

// Per-channel prior over quantized latents, as seen by the coder.
class EntropyModel {
 public:
  virtual ~EntropyModel() = default;
  virtual int channels() const = 0;
  virtual double raw_pmf(int channel, int v) const = 0;  // may be ~0 in tails
  // Integer support the coder should table; mass outside goes to the escape.
  virtual std::pair<int, int> support(int channel) const = 0;
  double pmf(int channel, int v) const { return std::max(raw_pmf(channel, v), kPmfFloor); }
};

// Tape handles for the trainable prior, created per computation graph.
struct EntropyParamVars {
  Var h1, b1, a1, h2, b2, a2, h3, b3, a3, h4, b4;
};

// Univariate monotone CDF chain per channel with hidden width 3 and depth 4
// (filters 1-3-3-3-1): f_k(x) = g_k(softplus(H_k) x + b_k) with
// g_k(v) = v + tanh(a_k) * tanh(v), final layer sigmoid. 43 parameters per
// channel, stored stacked across channels in a ParamStore.
class LearnedEntropyModel : public EntropyModel {
 public:
  static constexpr int kF = 3;

  LearnedEntropyModel(ParamStore& store, const std::string& prefix, int channels);

  void init_params(std::mt19937_64& rng);

  int channels() const override { return channels_; }
  double cdf(int channel, double x) const;
  double raw_pmf(int channel, int v) const override;
  std::pair<int, int> support(int channel) const override;

  EntropyParamVars vars(Tape& tape, bool trainable) const;

  // Total code length in bits for y (C,h,w): sum over elements of
  // -log2(max(CDF(x+1/2) - CDF(x-1/2), floor)). Differentiable in y and in
  // the prior parameters.
  Var rate_bits(Var y, const EntropyParamVars& ep) const;

 private:
  int channels_;
  ParamBlock *h1_, *b1_, *a1_, *h2_, *b2_, *a2_, *h3_, *b3_, *a3_, *h4_, *b4_;
};

// Explicit pmf tables; used to drive the coder with hand-built distributions.
class TableEntropyModel : public EntropyModel {
 public:
  TableEntropyModel(std::vector<std::vector<double>> pmfs, std::vector<int> lo);
  int channels() const override { return static_cast<int>(pmfs_.size()); }
  double raw_pmf(int channel, int v) const override;
  std::pair<int, int> support(int channel) const override;

 private:
  std::vector<std::vector<double>> pmfs_;
  std::vector<int> lo_;
};

}  // namespace slic
