#pragma once

#include "slic/perceptual.hpp"
#include "slic/train/config.hpp"
#include "slic/train/subflows.hpp"

namespace slic {

// Scalar view of one batch's losses. L_H = L_P + α·L_M + β·L_A holds
// exactly; D is MSE on the 8-bit scale (255² × MSE of [0,1] images) so the
// default λ lands at a mid-quality rate-distortion operating point.
struct LossReport {
  double lp = 0, lm = 0, la = 0, lh = 0;
  double r_bpp = 0, d_mse = 0, lc = 0;

  bool finite() const;
  LossReport& accumulate(const LossReport& other, double weight);
};

// Graph handles for one item's losses.
struct HidingLossVars {
  Var lp, lm, la, lh;  // lh is the phase-1 root
};

struct CodecLossVars {
  Var r, d, lc;  // lc is the phase-2 root
};

HidingLossVars assemble_hiding_loss(Tape& t, const SubflowVars& sv,
                                    const PerceptualMetric& pm, const TrainingConfig& cfg);

// pixels: count of image pixels (H·W) for the bpp normalization.
CodecLossVars assemble_codec_loss(Tape& t, const CodecPhaseVars& pv,
                                  const TrainingConfig& cfg, int64_t pixels);
CodecLossVars assemble_pretrain_loss(Tape& t, const CoverFlowVars& cv,
                                     const TrainingConfig& cfg, int64_t pixels);

// Forward-only codec terms on an existing subflow graph (for logging a
// complete report during phase 1).
void fill_codec_terms(const SubflowVars& sv, const TrainingConfig& cfg, int64_t pixels,
                      LossReport& rep);

}  // namespace slic
