#pragma once
// Deterministic random streams for the simulation harness.
//
// The generator is xoshiro256++ with its state filled from a SplitMix64
// sequence. Monte Carlo repetition `rep` under master seed `seed` draws from
// the substream
//
//     base = seed + (rep + 1) * 0x9E3779B97F4A7C15   (wrapping mod 2^64)
//     s[i] = splitmix64(base), i = 0..3               (four successive outputs)
//
// so any repetition can be generated in isolation, in any order, on any
// thread. Uniforms take the top 53 bits of the 64-bit output. Normal variates
// use the classic Box-Muller transform (pairs generated together, the second
// one cached). Everything is spelled out here instead of relying on
// std::normal_distribution, whose algorithm is implementation-defined, so that
// simulated panels are bit-for-bit reproducible across compilers, runs and
// thread counts.

#include <cmath>
#include <cstdint>

namespace smc {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero is a fixed point
  }

  static Rng substream(std::uint64_t seed, std::uint64_t rep) {
    return Rng(seed + (rep + 1) * 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 on (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace smc
