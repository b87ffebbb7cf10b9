#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "slic/codec.hpp"
#include "slic/message.hpp"
#include "slic/params.hpp"
#include "slic/train/config.hpp"

namespace slic {

// One self-contained model blob: codec + message parameters plus enough
// metadata to rebuild both nets. Checkpoints additionally carry optimizer
// state so interrupted training resumes exactly; the same format doubles
// as the inference model file (optimizer state is simply ignored).
struct CheckpointMeta {
  int latent_channels = 0;
  int msg_bits = 0;
  char preset = 'c';
  std::string stage;
  uint64_t seed = 0;
  int epochs_done = 0;
  bool has_optimizer = false;
};

void save_checkpoint(const std::string& path, const CheckpointMeta& meta, const Codec& codec,
                     const MessageCoder& mc, const Adam* opt_message, const Adam* opt_codec);

// Reads only the metadata header (cheap; used to size the nets).
CheckpointMeta peek_checkpoint(const std::string& path);

// Loads parameters into already-constructed nets whose dims must match.
// Optimizer pointers may be null; loading optimizer state requires
// has_optimizer in the file.
CheckpointMeta load_checkpoint(const std::string& path, Codec& codec, MessageCoder& mc,
                               Adam* opt_message, Adam* opt_codec);

// Writes <path>.json with dims, payload size, preset, seeds and digests.
void write_checkpoint_sidecar(const std::string& path, const CheckpointMeta& meta,
                              const Codec& codec, const MessageCoder& mc);

// Rolling checkpoint names inside a run directory.
std::string checkpoint_name(int epoch, const std::string& digest_hex);
std::optional<std::string> latest_checkpoint(const std::string& dir);
void prune_checkpoints(const std::string& dir, int keep_last);

// Convenience: build nets sized from a model file and load it.
struct LoadedModel {
  CheckpointMeta meta;
  std::unique_ptr<Codec> codec;
  std::unique_ptr<MessageCoder> message;
};
LoadedModel load_model(const std::string& path);

}  // namespace slic
