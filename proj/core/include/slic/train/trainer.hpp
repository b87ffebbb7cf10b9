#pragma once

#include <fstream>
#include <functional>
#include <limits>
#include <unordered_map>

#include "slic/perceptual.hpp"
#include "slic/train/checkpoint.hpp"
#include "slic/train/config.hpp"
#include "slic/train/dataset.hpp"
#include "slic/train/losses.hpp"

namespace slic {

// Rounded-quantization validation metrics (the inference path, not the
// training noise proxy). PSNR conventions: cover = PSNR(c, ĉ); stego =
// PSNR(c, ŝ); the recompression columns compare against the image that was
// re-compressed (cover2 = PSNR(ĉ, ĉ′), stego2 = PSNR(ŝ, ŝ′)).
struct ValStats {
  int epoch = -1;
  double ber = std::numeric_limits<double>::quiet_NaN();
  double psnr_cover = std::numeric_limits<double>::quiet_NaN();
  double psnr_stego = std::numeric_limits<double>::quiet_NaN();
  double psnr_cover2 = std::numeric_limits<double>::quiet_NaN();
  double psnr_stego2 = std::numeric_limits<double>::quiet_NaN();
};

struct TrainHooks {
  std::function<void(int epoch, int phase, int batch, const LossReport&)> on_batch;
  std::function<void(int epoch, int phase)> on_phase_end;
  std::function<void(const ValStats&)> on_val;
};

// Interleaved two-phase training (Algorithm 1): each epoch first updates the
// message nets under L_H with the codec frozen, then the codec under L_C
// with the message nets frozen. Freeze contracts are enforced with SHA-256
// parameter digests every epoch. stage="pretrain" runs the codec phase only
// (plain rate-distortion), which gives the SLIC stage a sensible start.
class Trainer {
 public:
  explicit Trainer(const TrainingConfig& cfg);

  Codec& codec() { return codec_; }
  MessageCoder& message() { return mc_; }
  const TrainingConfig& config() const { return cfg_; }
  const Dataset& dataset() const { return ds_; }
  int epochs_done() const { return epochs_done_; }
  const std::string& model_path() const { return model_path_; }

  // Continue from the newest checkpoint in out_dir instead of refusing to
  // touch a directory that already has them.
  void set_resume(bool resume) { resume_ = resume; }

  // ingest → init or resume → epoch loop → checkpoint/best/model export.
  // Returns the last validation stats. Non-finite losses abort with a
  // diagnostic snapshot; freeze violations throw logic_error.
  ValStats run(const TrainHooks& hooks = {});

  // Stages of run(), exposed for tests.
  void prepare();
  void train_epoch(int epoch, const TrainHooks& hooks);
  ValStats validate(int epoch);

 private:
  struct CachedItem {
    int c, h, w;
    std::vector<uint8_t> px;
  };

  Image load_item(const std::string& path);
  Image crop_for(int epoch, int64_t pos, const std::string& path);
  std::vector<uint8_t> message_for(int epoch, int64_t pos);
  uint64_t noise_seed_for(int epoch, int64_t pos) const;

  void run_phase1(int epoch, const std::vector<size_t>& order, const TrainHooks& hooks);
  void run_phase2(int epoch, const std::vector<size_t>& order, const TrainHooks& hooks);
  void run_pretrain_phase(int epoch, const std::vector<size_t>& order, const TrainHooks& hooks);

  void csv_header();
  void csv_train_row(int epoch, int phase, int batch, const LossReport& rep, bool full,
                     double ber, double pc, double ps, double ps2);
  void csv_val_row(const ValStats& vs);

  void abort_snapshot(int epoch, int phase, int batch, const LossReport& rep);
  CheckpointMeta meta_for(int epochs_done) const;
  void save_rolling(int epoch);
  void maybe_update_best(const ValStats& vs);
  void export_model();

  TrainingConfig cfg_;
  Codec codec_;
  MessageCoder mc_;
  const PerceptualMetric* pm_;
  Dataset ds_;
  std::unique_ptr<Adam> opt_msg_, opt_codec_;
  std::ofstream csv_;
  std::unordered_map<std::string, CachedItem> cache_;
  int epochs_done_ = 0;
  bool resume_ = false;
  bool prepared_ = false;
  double best_score_ = std::numeric_limits<double>::infinity();
  int best_epoch_ = -1;
  std::string model_path_;
};

}  // namespace slic
