#pragma once

#include <cstdint>
#include <vector>

#include "slic/attacks.hpp"
#include "slic/codec.hpp"
#include "slic/image.hpp"
#include "slic/message.hpp"

namespace slic {

// Controls for one item's training graph. Exactly one parameter group is
// trainable per phase; the other participates as constants.
struct FlowOptions {
  bool train_codec = false;
  bool train_message = false;
  TrainAttack attack;       // u(.) applied to the stego reconstruction
  uint64_t noise_seed = 0;  // seeds the quantizer noise draws
  bool with_rate = true;    // rate terms are cheap; off only in tests
};

// Handles into the four subflows: (a) cover compression and re-compression,
// (b) stego embedding and re-compression, (c) the attacked chain, (d)
// message extraction. Training-mode quantization (additive uniform noise)
// throughout; the first-stage draw is shared between the cover and stego
// branches so a zero perturbation collapses them onto each other exactly.
struct SubflowVars {
  Var c;                      // cover crop
  Var y;                      // g_e(c) pre-noise
  Var yq;                     // y + u
  Var yeq;                    // y + h_e(m) + u
  Var chat, chat2;            // decoded cover, its re-compression
  Var shat, shat2;            // decoded stego, its re-compression
  Var sdot;                   // attacked stego
  Var sdothat, sdothat2;      // compressed attacked stego, re-compression
  Var m_logits;               // h_d on the embedded latent
  Var m_logits_noised;        // h_d on the attacked chain's latent
  Var rate_y, rate_ye;        // estimated bits (scalars)
  Arr m;                      // target bits in {0,1}
};

SubflowVars forward_subflows(Tape& t, Codec& codec, MessageCoder& mc, const Image& cover,
                             const std::vector<uint8_t>& msg, const FlowOptions& opt);

// Codec-only chain for the rate-distortion pretraining stage: cover, noisy
// latent, reconstruction, rate.
struct CoverFlowVars {
  Var c, y, yq, chat;
  Var rate_y;
};

CoverFlowVars forward_cover_flow(Tape& t, Codec& codec, const Image& cover,
                                 uint64_t noise_seed, bool train_codec);

// Lean graph for Algorithm 1's codec phase: only what L_C touches. The
// frozen message net contributes the (constant) perturbation behind the
// rate term on y_e.
struct CodecPhaseVars {
  Var c, y, yq, yeq, chat;
  Var rate_y, rate_ye;
  Arr m;
};

CodecPhaseVars forward_codec_phase(Tape& t, Codec& codec, MessageCoder& mc,
                                   const Image& cover, const std::vector<uint8_t>& msg,
                                   uint64_t noise_seed);

// Uniform(-1/2, 1/2) tensor matching x's shape (the quantization proxy).
Var quant_noise_like(Tape& t, Var x, std::mt19937_64& rng);

}  // namespace slic
