#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace slic {

// Flat key=value run configuration. Keys mirror the field names below;
// '#' starts a comment, blank lines are ignored, later keys win.
struct TrainingConfig {
  // model
  int latent_channels = 96;
  int msg_bits = 64;
  char preset = 'c';  // perceptual-loss preset a|b|c

  // loss weights
  double tau = 2.0;     // perceptual-divergence threshold
  double alpha = 1.5;   // message-loss weight
  double beta = 1.0;    // adversarial-loss weight
  double gamma = 1.0;   // noised-message weight
  double lambda = 0.01; // rate-distortion trade-off (bpp vs 8-bit MSE)

  // optimization
  double lr_message = 1e-3;
  double lr_codec = 5e-5;
  int batch = 16;
  int epochs = 30;
  int crop = 64;

  // run control
  std::string stage = "slic";  // "pretrain" trains the codec alone
  std::string dataset;
  std::string out_dir = "run";
  std::string init_model;  // optional checkpoint to start from
  std::string perceptual = "fallback";
  uint64_t seed = 1;
  int checkpoint_every = 5;
  int keep_last = 3;
  double val_fraction = 0.1;
  int val_max_items = 48;

  void validate() const;  // throws std::invalid_argument
};

void apply_config_kv(TrainingConfig& cfg, const std::string& key, const std::string& value);
TrainingConfig parse_config_text(const std::string& text);
TrainingConfig parse_config_file(const std::string& path);

// Full round-trippable view (also used by manifests and sidecars).
std::map<std::string, std::string> config_to_map(const TrainingConfig& cfg);
std::string config_to_text(const TrainingConfig& cfg);

}  // namespace slic
