#pragma once

#include <random>
#include <string>
#include <vector>

#include "slic/nn_ops.hpp"
#include "slic/params.hpp"
#include "slic/tensor.hpp"

namespace slic {

// Latent-space watermark nets. h_e maps an n-bit message to an additive
// latent perturbation; h_d pools a latent back to n logits. Their
// parameters are the "message" group that Algorithm 1 trains in phase 1.
class MessageCoder {
 public:
  MessageCoder(int latent_channels, int msg_bits);

  void init_params(uint64_t seed);

  int bits() const { return bits_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  // Graph builders. `bits` holds n values in {0,1}; they enter the net in
  // bipolar form. (h,w) is the latent plane the perturbation broadcasts to.
  Var perturbation(Tape& t, const Arr& bits, int h, int w, bool trainable);
  Var logits(Tape& t, Var y, bool trainable);

  // Plain helpers on throwaway no-grad tapes.
  TensorData perturbation_plain(const std::vector<uint8_t>& bits, int h, int w);
  Arr logits_plain(const TensorData& y);
  std::vector<uint8_t> extract_bits(const TensorData& y);

  static Arr bits_to_arr(const std::vector<uint8_t>& bits);
  static std::vector<uint8_t> threshold_logits(const Arr& logits);  // logit > 0 -> 1

 private:
  int channels_, bits_;
  ParamStore store_;
  ParamBlock *lw_, *lb_, *ew0_, *eb0_, *ew1_, *eb1_;
  ParamBlock *dw0_, *db0_, *dw1_, *db1_, *dlw_, *dlb_;
};

// Messages travel through the CLI as hex, most significant nibble first.
std::vector<uint8_t> bits_from_hex(const std::string& hex, int nbits);
std::string bits_to_hex(const std::vector<uint8_t>& bits);
std::vector<uint8_t> random_bits(std::mt19937_64& rng, int nbits);

}  // namespace slic
