#pragma once

#include <cstdint>

#include "ra/errors.hpp"

namespace ra {

// Counter-based generator: output i is a pure function of (key, i), so a
// stream can be replayed from any position and split() streams are
// independent of draw order. The mixer is the SplitMix64 finalizer
// (Steele, Lea & Flood 2014; Vigna's public-domain constants).
class DeterministicRng {
 public:
  explicit DeterministicRng(uint64_t key, uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

  uint64_t next_u64() {
    uint64_t z = key_ + (++counter_) * UINT64_C(0x9E3779B97F4A7C15);
    return mix(z);
  }

  // Independent stream keyed by (this stream's key, label).
  DeterministicRng split(uint64_t label) const {
    uint64_t k = mix(key_ ^ mix(label * UINT64_C(0x9E3779B97F4A7C15) +
                                UINT64_C(0xD1B54A32D192ED03)));
    return DeterministicRng(k);
  }

  DeterministicRng split(uint64_t a, uint64_t b) const { return split(a).split(b); }

  // Uniform in [lo, hi); 53-bit mantissa, bit-identical across platforms.
  double uniform(double lo, double hi) {
    if (!(lo <= hi)) throw InvalidRange("rng_uniform: lo > hi");
    double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  // Uniform index in {0..k-1} via the fixed-point multiply reduction.
  uint64_t choice(uint64_t k) {
    if (k < 1) throw InvalidRange("rng_choice: k must be >= 1");
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * k) >> 64);
  }

  // +1 or -1, each with probability 1/2.
  int sign() { return choice(2) == 0 ? +1 : -1; }

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
  }

 private:
  uint64_t key_;
  uint64_t counter_;
};

}  // namespace ra
