#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>

namespace coseg {

/// Seeded generator shared by initialisation, shuffling and sampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    std::shuffle(items.begin(), items.end(), engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Stable 64-bit FNV-1a, used for config and input hashes.
std::uint64_t fnv1a(std::span<const char> bytes);

}  // namespace coseg
