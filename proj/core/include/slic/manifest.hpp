#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace slic {

// Provenance record written next to every CLI output. The stored argv plus
// the resolved seed are enough to replay the command byte-for-byte.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;               // resolved arguments, seed included
  std::map<std::string, std::string> config;   // resolved settings, for humans
  uint64_t seed = 0;
  std::map<std::string, std::string> digests;  // model/dataset/output hashes
  std::vector<std::string> inputs, outputs;
  std::string started_at, finished_at;         // ISO-8601 UTC
};

std::string iso8601_utc_now();

// Writes via a temp file + rename so readers never see partial JSON.
void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

// Sibling path: <output>.manifest.json
std::string manifest_path_for(const std::string& output_path);

void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace slic
