// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#ifndef ASSAYSEM_RANDOM_H_
#define ASSAYSEM_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace assaysem {

// SplitMix64 finalizer.
constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent child seed from a base seed and a path of indices,
// e.g. DeriveSeed(experiment_seed, {fold, k}).
inline uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> path) {
  uint64_t s = SplitMix64(base);
  for (uint64_t p : path) s = SplitMix64(s ^ SplitMix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

// Thin wrapper over mt19937_64 whose derived draws do not depend on the
// standard library's distribution implementations, so results are identical
// across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform in [0, 1).
  double UniformDouble() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). n must be > 0.
  size_t UniformIndex(size_t n) {
    // Lemire's multiply-shift with rejection.
    uint64_t range = n;
    while (true) {
      unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * range;
      uint64_t low = static_cast<uint64_t>(m);
      if (low >= (-range) % range) return static_cast<size_t>(m >> 64);
    }
  }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = UniformIndex(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace assaysem

#endif  // ASSAYSEM_RANDOM_H_
