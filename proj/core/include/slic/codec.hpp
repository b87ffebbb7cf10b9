#pragma once

#include <array>

#include "slic/bitstream.hpp"
#include "slic/entropy_model.hpp"
#include "slic/image.hpp"
#include "slic/nn_ops.hpp"
#include "slic/params.hpp"
#include "slic/range_coder.hpp"

namespace slic {

struct ModelSpec {
  int latent_channels = 96;
  int msg_bits = 64;
  char preset = 'c';  // perceptual-loss preset a|b|c
};

// Spatial reduction of the analysis transform (4 stride-2 stages).
constexpr int kStride = 16;

inline int pad_to_stride(int n) { return (n + kStride - 1) / kStride * kStride; }

// Analysis/synthesis pair (5x5 convs, stride 2, leaky ReLU 0.2) plus the
// learned factorized prior. All parameters live in one store; its SHA-256
// is the model hash carried by every bitstream.
class Codec {
 public:
  explicit Codec(const ModelSpec& spec);

  void init_params(uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  LearnedEntropyModel& entropy() { return em_; }
  const LearnedEntropyModel& entropy() const { return em_; }
  std::array<uint8_t, 32> param_digest() const { return store_.digest(); }

  // Graph builders. `trainable` gates parameter gradients; activations
  // propagate either way. Input dims must be multiples of kStride.
  Var analyze(Tape& t, Var x, bool trainable);
  Var synthesize(Tape& t, Var y, bool trainable);  // output clamped to [0,1]

  // Image-level helpers on throwaway no-grad tapes. analyze_image reflects
  // the input out to stride multiples; decode_latent crops back.
  TensorData analyze_image(const Image& im);
  Image decode_latent(const TensorData& yq, int out_h, int out_w);

  // Inference rounding: half away from zero.
  static Arr quantize(const Arr& y) { return y.round(); }

  // Estimated code length (bits) of an integer latent under the prior.
  double estimate_bits(const TensorData& yq) const;

  // Entropy-coded container round trip. unpack_latent verifies the model
  // hash and throws on mismatch.
  SlicBitstream pack_latent(const TensorData& yq, int img_h, int img_w, bool watermark);
  TensorData unpack_latent(const SlicBitstream& bs) const;

  Image decompress(const SlicBitstream& bs);

  // Coder tables derived from the prior; rebuilt after parameter changes.
  const std::vector<ChannelTable>& tables() const;
  void invalidate_tables() { tables_valid_ = false; }

 private:
  ModelSpec spec_;
  ParamStore store_;
  LearnedEntropyModel em_;
  ParamBlock *ew_[4], *eb_[4], *dw_[4], *db_[4];
  mutable std::vector<ChannelTable> tables_;
  mutable bool tables_valid_ = false;
};

}  // namespace slic
