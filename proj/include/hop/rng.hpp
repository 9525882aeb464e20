#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "hop/tensor.hpp"

namespace hop {

// All randomness flows through explicitly seeded instances of this; there is
// no global RNG. Normal draws use Box-Muller on top of mt19937_64 so the
// stream does not depend on stdlib distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(gen_() % static_cast<uint64_t>(hi - lo + 1));
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0, u2 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 1e-300);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(6.283185307179586 * u2);
    has_spare_ = true;
    return r * std::cos(6.283185307179586 * u2);
  }

  // Resamples outside two standard deviations.
  double trunc_normal(double stddev) {
    double x = 0.0;
    do {
      x = normal() * stddev;
    } while (std::fabs(x) > 2.0 * stddev);
    return x;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stable (master, stream) -> seed derivation, splitmix64 finalizer.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
  uint64_t z = master + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Tensor randn(const std::vector<int>& shape, Rng& rng, double stddev) {
  Tensor t = zeros(shape);
  for (auto& x : *t.data) x = rng.normal() * stddev;
  return t;
}

inline Tensor trunc_normal_init(const std::vector<int>& shape, Rng& rng, double stddev) {
  Tensor t = zeros(shape);
  for (auto& x : *t.data) x = rng.trunc_normal(stddev);
  return t;
}

}  // namespace hop
