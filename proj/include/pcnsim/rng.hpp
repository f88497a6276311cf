#pragma once

// Seedable, splittable 64-bit PRNG used by every stochastic routine.
//
// Core generator is xoshiro256** (Blackman & Vigna); the 256-bit state is
// expanded from a 64-bit seed with splitmix64. Per-run streams are derived
// from (base_seed, index) by mixing, so replicas never share a stream and a
// campaign replays bit-for-bit across builds and worker counts.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace pcnsim {

using u128 = unsigned __int128;

inline constexpr const char* kPrngId = "xoshiro256**/splitmix64";

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for replica `index` of a campaign started from `base_seed`.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  std::uint64_t s = base_seed;
  std::uint64_t a = splitmix64(s);
  std::uint64_t t = a ^ (index * 0xd1b54a32d192ed03ULL);
  return splitmix64(t);
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept { reseed(seed); }

  void reseed(std::uint64_t seed) noexcept {
    seed_ = seed;
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    u128 m = static_cast<u128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<u128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform integer in [0, bound) for 128-bit bounds (bitmask rejection).
  u128 below128(u128 bound) noexcept {
    if (bound <= std::numeric_limits<std::uint64_t>::max()) {
      return below(static_cast<std::uint64_t>(bound));
    }
    const auto hi = static_cast<std::uint64_t>((bound - 1) >> 64);
    const int shift = std::countl_zero(hi);
    for (;;) {
      u128 r = (static_cast<u128>(next() & (std::numeric_limits<std::uint64_t>::max() >> shift)) << 64) |
               next();
      if (r < bound) return r;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform_pos() noexcept { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  bool coin() noexcept { return (next() >> 63) != 0; }

 private:
  std::uint64_t s_[4]{};
  std::uint64_t seed_{0};
};

}  // namespace pcnsim
