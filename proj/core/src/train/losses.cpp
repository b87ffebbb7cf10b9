#include "slic/train/losses.hpp"

#include <cmath>

namespace slic {

bool LossReport::finite() const {
  for (double v : {lp, lm, la, lh, r_bpp, d_mse, lc})
    if (!std::isfinite(v)) return false;
  return true;
}

LossReport& LossReport::accumulate(const LossReport& o, double w) {
  lp += w * o.lp;
  lm += w * o.lm;
  la += w * o.la;
  lh += w * o.lh;
  r_bpp += w * o.r_bpp;
  d_mse += w * o.d_mse;
  lc += w * o.lc;
  return *this;
}

namespace {

Var hinge(Tape&, Var dist, double tau) {
  // ReLU(τ − d)
  return relu(add_scalar(scale(dist, -1.0), tau));
}

}  // namespace

HidingLossVars assemble_hiding_loss(Tape& t, const SubflowVars& sv,
                                    const PerceptualMetric& pm, const TrainingConfig& cfg) {
  HidingLossVars lv;
  switch (cfg.preset) {
    case 'a':
      lv.lp = mse(sv.chat, sv.shat);
      break;
    case 'b':
      lv.lp = add(add(pm.distance(t, sv.chat, sv.shat), pm.distance(t, sv.chat, sv.chat2)),
                  mse(sv.chat, sv.shat));
      break;
    default:
      lv.lp = add(pm.distance(t, sv.chat, sv.shat), pm.distance(t, sv.chat, sv.chat2));
      break;
  }
  lv.lm = add(bce_with_logits(sv.m_logits, sv.m),
              scale(bce_with_logits(sv.m_logits_noised, sv.m), cfg.gamma));
  lv.la = add(hinge(t, pm.distance(t, sv.shat, sv.shat2), cfg.tau),
              hinge(t, pm.distance(t, sv.sdothat, sv.sdothat2), cfg.tau));
  lv.lh = add(lv.lp, add(scale(lv.lm, cfg.alpha), scale(lv.la, cfg.beta)));
  return lv;
}

CodecLossVars assemble_codec_loss(Tape& t, const CodecPhaseVars& pv,
                                  const TrainingConfig& cfg, int64_t pixels) {
  (void)t;
  CodecLossVars lv;
  lv.r = scale(add(pv.rate_y, pv.rate_ye), 1.0 / static_cast<double>(pixels));
  lv.d = scale(mse(pv.c, pv.chat), 255.0 * 255.0);
  lv.lc = add(lv.r, scale(lv.d, cfg.lambda));
  return lv;
}

CodecLossVars assemble_pretrain_loss(Tape& t, const CoverFlowVars& cv,
                                     const TrainingConfig& cfg, int64_t pixels) {
  (void)t;
  CodecLossVars lv;
  lv.r = scale(cv.rate_y, 1.0 / static_cast<double>(pixels));
  lv.d = scale(mse(cv.c, cv.chat), 255.0 * 255.0);
  lv.lc = add(lv.r, scale(lv.d, cfg.lambda));
  return lv;
}

void fill_codec_terms(const SubflowVars& sv, const TrainingConfig& cfg, int64_t pixels,
                      LossReport& rep) {
  rep.r_bpp = (sv.rate_y.item() + sv.rate_ye.item()) / static_cast<double>(pixels);
  Arr diff = sv.c.v() - sv.chat.v();
  rep.d_mse = 255.0 * 255.0 * diff.square().mean();
  rep.lc = rep.r_bpp + cfg.lambda * rep.d_mse;
}

}  // namespace slic
