#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace lsstruct {

// Seeded random source. Draws are built from raw 64-bit engine output so the
// streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on {0, ..., n - 1}; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  // Number of trials up to and including the first success.
  std::uint64_t geometric(double success_probability) {
    if (success_probability >= 1.0) return 1;
    const double u = uniform();
    const double k =
        std::ceil(std::log1p(-u) / std::log1p(-success_probability));
    return k < 1.0 ? 1 : static_cast<std::uint64_t>(k);
  }

  std::uint64_t poisson(double mean) {
    // Sum of exponential gaps; only used with small means.
    std::uint64_t k = 0;
    double t = exponential(1.0);
    while (t < mean) {
      ++k;
      t += exponential(1.0);
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer, used to derive independent child seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace lsstruct
