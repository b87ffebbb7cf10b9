#include "slic/train/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slic/digest.hpp"
#include "slic/manifest.hpp"

namespace slic {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'S', 'L', 'C', 'K'};
constexpr uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>((uint64_t(v) >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char b[sizeof(T)];
  is.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= uint64_t(b[i]) << (8 * i);
  return static_cast<T>(v);
}

void put_string(std::ostream& os, const std::string& s) {
  put<uint16_t>(os, static_cast<uint16_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  uint16_t n = get<uint16_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

CheckpointMeta read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  uint16_t version = get<uint16_t>(is);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  CheckpointMeta meta;
  meta.latent_channels = get<uint16_t>(is);
  meta.msg_bits = get<uint16_t>(is);
  meta.preset = static_cast<char>(get<uint8_t>(is));
  meta.stage = get_string(is);
  meta.seed = get<uint64_t>(is);
  meta.epochs_done = get<int32_t>(is);
  meta.has_optimizer = get<uint8_t>(is) != 0;
  return meta;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointMeta& meta, const Codec& codec,
                     const MessageCoder& mc, const Adam* opt_message, const Adam* opt_codec) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot write " + tmp);
    os.write(kMagic, 4);
    put<uint16_t>(os, kVersion);
    put<uint16_t>(os, static_cast<uint16_t>(meta.latent_channels));
    put<uint16_t>(os, static_cast<uint16_t>(meta.msg_bits));
    put<uint8_t>(os, static_cast<uint8_t>(meta.preset));
    put_string(os, meta.stage);
    put<uint64_t>(os, meta.seed);
    put<int32_t>(os, meta.epochs_done);
    bool with_opt = opt_message != nullptr && opt_codec != nullptr;
    put<uint8_t>(os, with_opt ? 1 : 0);
    codec.params().save(os);
    mc.params().save(os);
    if (with_opt) {
      opt_message->save(os);
      opt_codec->save(os);
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

CheckpointMeta peek_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  return read_header(is);
}

CheckpointMeta load_checkpoint(const std::string& path, Codec& codec, MessageCoder& mc,
                               Adam* opt_message, Adam* opt_codec) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  CheckpointMeta meta = read_header(is);
  if (meta.latent_channels != codec.spec().latent_channels || meta.msg_bits != mc.bits())
    throw std::runtime_error("checkpoint: model dims mismatch in " + path);
  codec.params().load(is);
  mc.params().load(is);
  if (opt_message != nullptr || opt_codec != nullptr) {
    if (!meta.has_optimizer)
      throw std::runtime_error("checkpoint: no optimizer state in " + path);
    if (opt_message) opt_message->load(is);
    if (opt_codec) opt_codec->load(is);
  }
  codec.invalidate_tables();
  return meta;
}

void write_checkpoint_sidecar(const std::string& path, const CheckpointMeta& meta,
                              const Codec& codec, const MessageCoder& mc) {
  nlohmann::json j;
  j["latent_channels"] = meta.latent_channels;
  j["msg_bits"] = meta.msg_bits;
  j["preset"] = std::string(1, meta.preset);
  j["stage"] = meta.stage;
  j["seed"] = meta.seed;
  j["epochs_done"] = meta.epochs_done;
  j["codec_digest"] = codec.params().digest_hex();
  j["message_digest"] = mc.params().digest_hex();
  j["created"] = iso8601_utc_now();
  write_text_atomic(path + ".json", j.dump(2) + "\n");
}

std::string checkpoint_name(int epoch, const std::string& digest_hex) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "ckpt_e%04d_%s.slcm", epoch, digest_hex.substr(0, 12).c_str());
  return buf;
}

namespace {

const std::regex kCkptRe(R"(ckpt_e(\d{4})_[0-9a-f]{12}\.slcm)");

}  // namespace

std::optional<std::string> latest_checkpoint(const std::string& dir) {
  if (!fs::is_directory(dir)) return std::nullopt;
  int best_epoch = -1;
  std::string best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, kCkptRe)) {
      int e = std::stoi(m[1].str());
      if (e > best_epoch) {
        best_epoch = e;
        best = entry.path().string();
      }
    }
  }
  if (best_epoch < 0) return std::nullopt;
  return best;
}

void prune_checkpoints(const std::string& dir, int keep_last) {
  std::vector<std::pair<int, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, kCkptRe)) found.emplace_back(std::stoi(m[1].str()), entry.path());
  }
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t i = static_cast<size_t>(keep_last); i < found.size(); ++i) {
    std::error_code ec;
    fs::remove(found[i].second, ec);
    fs::remove(found[i].second.string() + ".json", ec);
  }
}

LoadedModel load_model(const std::string& path) {
  LoadedModel lm;
  lm.meta = peek_checkpoint(path);
  ModelSpec spec;
  spec.latent_channels = lm.meta.latent_channels;
  spec.msg_bits = lm.meta.msg_bits;
  spec.preset = lm.meta.preset;
  lm.codec = std::make_unique<Codec>(spec);
  lm.message = std::make_unique<MessageCoder>(spec.latent_channels, spec.msg_bits);
  load_checkpoint(path, *lm.codec, *lm.message, nullptr, nullptr);
  return lm;
}

}  // namespace slic
