#pragma once

#include <cmath>
#include <cstdint>

// Seeded random number generation with cross-platform bit-identical output.
//
// The standard <random> distributions are implementation-defined, so traces
// generated with them would differ between standard libraries. Everything
// here is specified down to the bit: SplitMix64 for seeding and counter-mode
// streams, xoshiro256++ for sequential draws, and explicit transforms for
// uniform, Gaussian (polar method) and Poisson (Knuth) variates.

namespace scalesim::rng {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  return mix64(state += 0x9E3779B97F4A7C15ull);
}

inline double to_unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// One draw from a counter-mode stream: a pure function of (key, index).
// Used for per-event cold-start jitter so paired runs that order replicas at
// different steps still face the same draw sequence.
inline double counter_uniform01(std::uint64_t key, std::uint64_t index) {
  std::uint64_t state = mix64(key) + index * 0x9E3779B97F4A7C15ull;
  return to_unit_interval(splitmix64(state));
}

// xoshiro256++ (Blackman, Vigna 2019), seeded through SplitMix64.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  double uniform01() { return to_unit_interval(next()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Marsaglia polar method; one variate per call, the pair partner is discarded.
  double gaussian(double mean, double sigma) {
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return mean + sigma * u * std::sqrt(-2.0 * std::log(s) / s);
  }

  // Knuth's product-of-uniforms algorithm; large means are split in half so
  // exp(-mean) stays representable.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 50.0) {
      const double half = mean / 2.0;
      return poisson(half) + poisson(mean - half);
    }
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double product = 1.0;
    do {
      ++k;
      product *= uniform01();
    } while (product > limit);
    return k - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace scalesim::rng
