#pragma once

// deterministic randomness. std::mt19937_64 output is pinned by the standard,
// but the distribution adaptors are not, so uniform and gaussian draws are
// produced by explicit transforms here. splitmix64 serves as a stateless hash
// for per-pixel noise where seeding an engine would be wasteful.

#include <cmath>
#include <cstdint>
#include <random>

#include "mlai/types.hpp"

namespace mlai {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// order-sensitive combine for hashing tuples of values
inline std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t v) {
  return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1), 53-bit resolution
  double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // [0, n); n must be positive. rejection-free and good enough for sim use.
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + int(below(std::uint64_t(hi - lo) + 1));
  }

  bool chance(double p) { return uniform01() < p; }

  // standard normal via Box-Muller; pairs are cached
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  double gauss(double mean, double sigma) { return mean + sigma * gauss(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mlai
