#pragma once

// Deterministic random streams for Monte-Carlo work. Every trial derives its
// own generator from (master seed, path of indices), so results never depend
// on scheduling or on the number of worker threads.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace specsense {

/// 64-bit finalizer (murmur3 style); bijective, used for stream derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdull;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ull;
  z ^= z >> 33;
  return z;
}

/// xoshiro256** with Box-Muller normals. Self-contained so that streams are
/// bit-reproducible regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept {
    // splitmix64 expansion of the seed into the four state words
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Equiprobable +1 / -1.
  int sign() noexcept { return (next() >> 63) ? 1 : -1; }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Rayleigh channel gain with E[g^2] = 1.
  double rayleigh_gain() noexcept {
    const double u = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    return std::sqrt(-std::log(u));
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Node in a counter-based stream tree. child(i) is a pure function of
/// (key, i), so trial t always receives the same stream no matter which
/// worker runs it or in what order.
struct StreamKey {
  std::uint64_t key = 0;

  constexpr StreamKey child(std::uint64_t index) const noexcept {
    return {mix64(key + 0x9e3779b97f4a7c15ull * (index + 1))};
  }

  Rng rng() const noexcept { return Rng(key); }
};

inline constexpr StreamKey master_stream(std::uint64_t seed) noexcept {
  return {mix64(seed ^ 0x5851f42d4c957f2dull)};
}

}  // namespace specsense
