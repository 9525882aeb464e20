#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hop {

inline constexpr const char* kToolVersion = "0.1.0";

// Flat "key = value" run configuration. Lines starting with '#' and blank
// lines are skipped; keys keep file order so serialization round-trips.
struct KvConfig {
  std::vector<std::pair<std::string, std::string>> entries;

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);  // upsert
  std::string get_str(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;  // true/false/1/0

  // Throws naming the first key outside the allowed set; catches typos early.
  void require_known(const std::vector<std::string>& allowed) const;
};

KvConfig parse_kv_text(const std::string& text);
KvConfig parse_kv_file(const std::string& path);
std::string kv_to_text(const KvConfig& cfg);

// Written to the output directory before any computation, so every artifact
// can be traced to (and regenerated from) the exact command, seed and config.
struct RunManifest {
  std::string version = kToolVersion;
  std::string command;
  std::uint64_t master_seed = 0;
  KvConfig config;
  std::vector<std::string> artifacts;
};

void save_manifest(const std::string& path, const RunManifest& m);
RunManifest load_manifest(const std::string& path);

}  // namespace hop
