#include "hop/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace hop {

namespace {

constexpr char kMagic[4] = {'T', 'N', 'S', '1'};

void put_u32(std::ofstream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::ifstream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("tensor container: truncated header");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void put_f64(std::ofstream& os, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; i++) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::ifstream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("tensor container: truncated payload");
  uint64_t u = 0;
  for (int i = 0; i < 8; i++) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& entries) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_tensors: cannot open " + path);
  os.write(kMagic, 4);
  put_u32(os, static_cast<uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    check_finite(t, "save_tensors");
    put_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) put_u32(os, static_cast<uint32_t>(d));
    for (double v : *t.data) put_f64(os, v);
  }
  if (!os) throw std::runtime_error("save_tensors: write failed on " + path);
}

std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_tensors: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_tensors: bad magic in " + path);
  const uint32_t count = get_u32(is);
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(count);
  for (uint32_t e = 0; e < count; e++) {
    const uint32_t name_len = get_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw std::runtime_error("load_tensors: truncated name");
    const uint32_t ndim = get_u32(is);
    std::vector<int> shape(ndim);
    for (uint32_t i = 0; i < ndim; i++) shape[i] = static_cast<int>(get_u32(is));
    Tensor t = zeros(shape);
    for (auto& v : *t.data) v = get_f64(is);
    check_finite(t, "load_tensors");
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

void save_checkpoint(const std::string& path, const Params& params) {
  std::vector<std::pair<std::string, Tensor>> entries;
  entries.reserve(params.size());
  for (const Parameter& p : params) entries.emplace_back(p.name, p.value);
  save_tensors(path, entries);
}

void load_checkpoint(const std::string& path, Params& params) {
  auto entries = load_tensors(path);
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : entries) by_name[name] = &t;
  for (Parameter& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end())
      throw std::runtime_error("load_checkpoint: missing tensor " + p.name);
    if (it->second->shape != p.value.shape)
      throw std::runtime_error("load_checkpoint: shape mismatch for " + p.name + ": " +
                               shape_str(it->second->shape) + " vs " +
                               shape_str(p.value.shape));
    *p.value.data = *it->second->data;
    by_name.erase(it);
  }
  if (!by_name.empty())
    throw std::runtime_error("load_checkpoint: unexpected tensor " +
                             by_name.begin()->first);
}

void write_ppm(const std::string& path, const Tensor& rgb, int rows, int cols) {
  if (rgb.rank() != 2 || rgb.dim(1) != 3 || rgb.dim(0) != rows * cols)
    throw std::runtime_error("write_ppm: want [" + std::to_string(rows * cols) +
                             ",3], got " + shape_str(rgb.shape));
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_ppm: cannot open " + path);
  os << "P6\n" << cols << " " << rows << "\n255\n";
  for (int i = 0; i < rows * cols; i++)
    for (int c = 0; c < 3; c++) {
      const double v = std::clamp(rgb.at(i, c), 0.0, 1.0);
      os.put(static_cast<char>(std::lround(v * 255.0)));
    }
  if (!os) throw std::runtime_error("write_ppm: write failed on " + path);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace hop
