#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tdcr {

// splitmix64: the counter-based generator used for all noise streams that
// must be pure functions of (seed, counters), e.g. the augmentation
// random-walk stream and dropout masks.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

// Derives an independent stream seed from a master seed and a tag string.
inline uint64_t derive_seed(uint64_t master, std::string_view tag) {
  uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a offset
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return mix_seed(master, h);
}

inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index) {
  return mix_seed(derive_seed(master, tag), index);
}

// Uniform double in [0, 1) from a counter-based draw.
inline double counter_uniform01(uint64_t seed, uint64_t counter) {
  return static_cast<double>(splitmix64(mix_seed(seed, counter)) >> 11) *
         0x1.0p-53;
}

inline double counter_uniform(uint64_t seed, uint64_t counter, double lo, double hi) {
  return lo + (hi - lo) * counter_uniform01(seed, counter);
}

// Standard normal via Box-Muller; consumes counters 2k and 2k+1.
double counter_normal(uint64_t seed, uint64_t counter);

// Stateful stream for bulk sampling (dataset collection, initialization,
// batch index draws). Deterministic for a fixed seed on a given platform.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  // Uniform integer in [0, n).
  uint64_t index(uint64_t n) {
    return std::uniform_int_distribution<uint64_t>(0, n - 1)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tdcr
