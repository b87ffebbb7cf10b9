#include "slic/train/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slic {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int to_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
  }
}

double to_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  }
}

uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    uint64_t r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad seed for " + key + ": '" + v + "'");
  }
}

}  // namespace

void TrainingConfig::validate() const {
  if (latent_channels <= 0 || msg_bits <= 0)
    throw std::invalid_argument("config: latent_channels and msg_bits must be positive");
  if (preset != 'a' && preset != 'b' && preset != 'c')
    throw std::invalid_argument("config: preset must be one of a, b, c");
  if (tau <= 0) throw std::invalid_argument("config: tau must be > 0");
  if (alpha < 0 || beta < 0 || gamma < 0 || lambda < 0)
    throw std::invalid_argument("config: loss weights must be >= 0");
  if (lr_message <= 0 || lr_codec <= 0)
    throw std::invalid_argument("config: learning rates must be positive");
  if (batch <= 0 || epochs < 0 || crop <= 0)
    throw std::invalid_argument("config: batch/epochs/crop out of range");
  if (crop % 16 != 0)
    throw std::invalid_argument("config: crop must be a multiple of 16");
  if (stage != "slic" && stage != "pretrain")
    throw std::invalid_argument("config: stage must be 'slic' or 'pretrain'");
  if (val_fraction < 0 || val_fraction >= 1)
    throw std::invalid_argument("config: val_fraction must be in [0,1)");
  if (checkpoint_every <= 0 || keep_last <= 0 || val_max_items <= 0)
    throw std::invalid_argument("config: checkpoint/validation knobs must be positive");
}

void apply_config_kv(TrainingConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "latent_channels") cfg.latent_channels = to_int(value, key);
  else if (key == "msg_bits") cfg.msg_bits = to_int(value, key);
  else if (key == "preset") {
    if (value.size() != 1) throw std::invalid_argument("config: preset must be a, b or c");
    cfg.preset = value[0];
  } else if (key == "tau") cfg.tau = to_double(value, key);
  else if (key == "alpha") cfg.alpha = to_double(value, key);
  else if (key == "beta") cfg.beta = to_double(value, key);
  else if (key == "gamma") cfg.gamma = to_double(value, key);
  else if (key == "lambda") cfg.lambda = to_double(value, key);
  else if (key == "lr_message") cfg.lr_message = to_double(value, key);
  else if (key == "lr_codec") cfg.lr_codec = to_double(value, key);
  else if (key == "batch") cfg.batch = to_int(value, key);
  else if (key == "epochs") cfg.epochs = to_int(value, key);
  else if (key == "crop") cfg.crop = to_int(value, key);
  else if (key == "stage") cfg.stage = value;
  else if (key == "dataset") cfg.dataset = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "init_model") cfg.init_model = value;
  else if (key == "perceptual") cfg.perceptual = value;
  else if (key == "seed") cfg.seed = to_u64(value, key);
  else if (key == "checkpoint_every") cfg.checkpoint_every = to_int(value, key);
  else if (key == "keep_last") cfg.keep_last = to_int(value, key);
  else if (key == "val_fraction") cfg.val_fraction = to_double(value, key);
  else if (key == "val_max_items") cfg.val_max_items = to_int(value, key);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

TrainingConfig parse_config_text(const std::string& text) {
  TrainingConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key=value: '" + line + "'");
    apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

TrainingConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::map<std::string, std::string> config_to_map(const TrainingConfig& cfg) {
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  std::map<std::string, std::string> m;
  m["latent_channels"] = std::to_string(cfg.latent_channels);
  m["msg_bits"] = std::to_string(cfg.msg_bits);
  m["preset"] = std::string(1, cfg.preset);
  m["tau"] = num(cfg.tau);
  m["alpha"] = num(cfg.alpha);
  m["beta"] = num(cfg.beta);
  m["gamma"] = num(cfg.gamma);
  m["lambda"] = num(cfg.lambda);
  m["lr_message"] = num(cfg.lr_message);
  m["lr_codec"] = num(cfg.lr_codec);
  m["batch"] = std::to_string(cfg.batch);
  m["epochs"] = std::to_string(cfg.epochs);
  m["crop"] = std::to_string(cfg.crop);
  m["stage"] = cfg.stage;
  m["dataset"] = cfg.dataset;
  m["out_dir"] = cfg.out_dir;
  m["init_model"] = cfg.init_model;
  m["perceptual"] = cfg.perceptual;
  m["seed"] = std::to_string(cfg.seed);
  m["checkpoint_every"] = std::to_string(cfg.checkpoint_every);
  m["keep_last"] = std::to_string(cfg.keep_last);
  m["val_fraction"] = num(cfg.val_fraction);
  m["val_max_items"] = std::to_string(cfg.val_max_items);
  return m;
}

std::string config_to_text(const TrainingConfig& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : config_to_map(cfg)) os << k << " = " << v << "\n";
  return os.str();
}

}  // namespace slic
