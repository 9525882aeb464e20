#include "hop/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"

namespace hop {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
  throw std::runtime_error("config key '" + key + "': " + what);
}

}  // namespace

bool KvConfig::has(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return true;
  return false;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries)
    if (k == key) {
      v = value;
      return;
    }
  entries.emplace_back(key, value);
}

std::string KvConfig::get_str(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return fallback;
}

int KvConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_str(key, "");
  try {
    size_t pos = 0;
    const int out = std::stoi(v, &pos);
    if (pos != v.size()) bad_key(key, "trailing characters in '" + v + "'");
    return out;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception&) {
    bad_key(key, "expected an integer, got '" + v + "'");
  }
}

std::uint64_t KvConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_str(key, "");
  try {
    size_t pos = 0;
    const std::uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) bad_key(key, "trailing characters in '" + v + "'");
    return out;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception&) {
    bad_key(key, "expected an unsigned integer, got '" + v + "'");
  }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_str(key, "");
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) bad_key(key, "trailing characters in '" + v + "'");
    return out;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception&) {
    bad_key(key, "expected a number, got '" + v + "'");
  }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_str(key, "");
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_key(key, "expected true/false, got '" + v + "'");
}

void KvConfig::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [k, v] : entries) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == k;
    if (!ok) bad_key(k, "unknown key");
  }
}

KvConfig parse_kv_text(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.has(key)) bad_key(key, "duplicate entry");
    cfg.entries.emplace_back(key, value);
  }
  return cfg;
}

KvConfig parse_kv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kv_text(ss.str());
}

std::string kv_to_text(const KvConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries) out += k + " = " + v + "\n";
  return out;
}

void save_manifest(const std::string& path, const RunManifest& m) {
  Json j;
  j["tool"] = "hop";
  j["version"] = m.version;
  j["command"] = m.command;
  j["master_seed"] = std::to_string(m.master_seed);
  Json cfg = Json::object();
  for (const auto& [k, v] : m.config.entries) cfg[k] = v;
  j["config"] = cfg;
  j["artifacts"] = m.artifacts;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_manifest: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("save_manifest: write failed for " + path);
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("load_manifest: bad json in " + path + ": " + e.what());
  }
  RunManifest m;
  m.version = j.at("version").get<std::string>();
  m.command = j.at("command").get<std::string>();
  m.master_seed = std::stoull(j.at("master_seed").get<std::string>());
  for (const auto& [k, v] : j.at("config").items())
    m.config.entries.emplace_back(k, v.get<std::string>());
  m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  return m;
}

}  // namespace hop
