#include "slic/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace slic {

std::string iso8601_utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_text_atomic: cannot open " + tmp);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw std::runtime_error("write_text_atomic: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("write_text_atomic: rename failed for " + path);
}

void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["digests"] = m.digests;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  write_text_atomic(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_manifest: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.config = j.value("config", std::map<std::string, std::string>{});
  m.seed = j.at("seed").get<uint64_t>();
  m.digests = j.value("digests", std::map<std::string, std::string>{});
  m.inputs = j.value("inputs", std::vector<std::string>{});
  m.outputs = j.value("outputs", std::vector<std::string>{});
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  return m;
}

std::string manifest_path_for(const std::string& output_path) {
  return output_path + ".manifest.json";
}

}  // namespace slic
