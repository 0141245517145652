#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (key, counter), so per-run and per-step substreams need no shared state and
// reproduce regardless of execution order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace curvediff {

inline constexpr std::string_view kGeneratorId = "philox4x32-10+box-muller";

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of substream k. Substream 0 is the base seed itself.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  return k == 0 ? seed : splitmix64(seed + k * 0x9E3779B97F4A7C15ull);
}

/// Standard normal draws addressed by (seed, step).
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  /// Fills out with independent N(0,1) values for the given step.
  void draw(std::uint64_t step, std::span<double> out) const {
    for (std::size_t i = 0; i < out.size(); i += 2) {
      const std::uint64_t block = i / 2;
      const auto r = philox4x32({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                                 static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)},
                                key_);
      const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
      const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
      // u1 in (0,1], u2 in [0,1)
      const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
      const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      out[i] = radius * std::cos(angle);
      if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
    }
  }

  std::vector<double> draw(std::uint64_t step, std::size_t dim) const {
    std::vector<double> v(dim);
    draw(step, v);
    return v;
  }

 private:
  std::array<std::uint32_t, 2> key_;
};

/// Sequential generator over a Philox counter, for sampling test inputs.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : stream_(seed), seed_(seed) {}

  std::uint64_t next_u64() {
    const auto r = philox4x32({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                               0xC0FFEEu, 0u},
                              {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    ++counter_;
    return (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
  }
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    double z = 0.0;
    stream_.draw(counter_++ | (1ull << 63), std::span<double>(&z, 1));
    return z;
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  NoiseStream stream_;
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace curvediff
