#include "slic/train/subflows.hpp"

namespace slic {

Var quant_noise_like(Tape& t, Var x, std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> dist(-0.5, 0.5);
  Arr u(x.size());
  for (int64_t i = 0; i < u.size(); ++i) u[i] = dist(rng);
  return t.constant(TensorData{x.shape(), std::move(u)});
}

SubflowVars forward_subflows(Tape& t, Codec& codec, MessageCoder& mc, const Image& cover,
                             const std::vector<uint8_t>& msg, const FlowOptions& opt) {
  SubflowVars sv;
  sv.m = MessageCoder::bits_to_arr(msg);
  std::mt19937_64 rng(opt.noise_seed);

  // (a) cover: compress, then re-compress the reconstruction.
  sv.c = t.constant(cover.tensor());
  sv.y = codec.analyze(t, sv.c, opt.train_codec);
  Var u1 = quant_noise_like(t, sv.y, rng);
  sv.yq = add(sv.y, u1);
  sv.chat = codec.synthesize(t, sv.yq, opt.train_codec);
  Var yc2 = codec.analyze(t, sv.chat, opt.train_codec);
  Var u2 = quant_noise_like(t, yc2, rng);
  sv.chat2 = codec.synthesize(t, add(yc2, u2), opt.train_codec);

  // (b) stego: same first-stage and second-stage noise draws as the cover
  // branch, so h_e ≡ 0 gives ŝ = ĉ and ŝ′ = ĉ′ elementwise.
  Var pert = mc.perturbation(t, sv.m, sv.y.dim(1), sv.y.dim(2), opt.train_message);
  sv.yeq = add(add(sv.y, pert), u1);
  sv.shat = codec.synthesize(t, sv.yeq, opt.train_codec);
  Var ys2 = codec.analyze(t, sv.shat, opt.train_codec);
  sv.shat2 = codec.synthesize(t, add(ys2, u2), opt.train_codec);

  // (c) attack chain: compress the attacked stego, then re-compress.
  sv.sdot = apply_train_attack(t, sv.shat, opt.attack);
  Var yn = codec.analyze(t, sv.sdot, opt.train_codec);
  Var u3 = quant_noise_like(t, yn, rng);
  Var ynq = add(yn, u3);
  sv.sdothat = codec.synthesize(t, ynq, opt.train_codec);
  Var yn2 = codec.analyze(t, sv.sdothat, opt.train_codec);
  Var u4 = quant_noise_like(t, yn2, rng);
  sv.sdothat2 = codec.synthesize(t, add(yn2, u4), opt.train_codec);

  // (d) extraction from the clean and attacked latents.
  sv.m_logits = mc.logits(t, sv.yeq, opt.train_message);
  sv.m_logits_noised = mc.logits(t, ynq, opt.train_message);

  if (opt.with_rate) {
    EntropyParamVars ep = codec.entropy().vars(t, opt.train_codec);
    sv.rate_y = codec.entropy().rate_bits(sv.yq, ep);
    sv.rate_ye = codec.entropy().rate_bits(sv.yeq, ep);
  }
  return sv;
}

CoverFlowVars forward_cover_flow(Tape& t, Codec& codec, const Image& cover,
                                 uint64_t noise_seed, bool train_codec) {
  CoverFlowVars cv;
  std::mt19937_64 rng(noise_seed);
  cv.c = t.constant(cover.tensor());
  cv.y = codec.analyze(t, cv.c, train_codec);
  cv.yq = add(cv.y, quant_noise_like(t, cv.y, rng));
  cv.chat = codec.synthesize(t, cv.yq, train_codec);
  EntropyParamVars ep = codec.entropy().vars(t, train_codec);
  cv.rate_y = codec.entropy().rate_bits(cv.yq, ep);
  return cv;
}

CodecPhaseVars forward_codec_phase(Tape& t, Codec& codec, MessageCoder& mc,
                                   const Image& cover, const std::vector<uint8_t>& msg,
                                   uint64_t noise_seed) {
  CodecPhaseVars pv;
  pv.m = MessageCoder::bits_to_arr(msg);
  std::mt19937_64 rng(noise_seed);
  pv.c = t.constant(cover.tensor());
  pv.y = codec.analyze(t, pv.c, true);
  Var u1 = quant_noise_like(t, pv.y, rng);
  pv.yq = add(pv.y, u1);
  pv.chat = codec.synthesize(t, pv.yq, true);
  Var pert = mc.perturbation(t, pv.m, pv.y.dim(1), pv.y.dim(2), false);
  pv.yeq = add(add(pv.y, pert), u1);
  EntropyParamVars ep = codec.entropy().vars(t, true);
  pv.rate_y = codec.entropy().rate_bits(pv.yq, ep);
  pv.rate_ye = codec.entropy().rate_bits(pv.yeq, ep);
  return pv;
}

}  // namespace slic
