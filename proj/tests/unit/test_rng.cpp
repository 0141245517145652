#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "curvediff/rng.hpp"

using namespace curvediff;

TEST_SUITE("rng") {
  TEST_CASE("Philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("substream zero is the base seed and others are distinct") {
    CHECK(derive_seed(42, 0) == 42);
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(derive_seed(42, k));
    CHECK(seen.size() == 1000);
  }

  TEST_CASE("noise is a pure function of seed and step") {
    const NoiseStream a(7), b(7), c(8);
    CHECK(a.draw(5, 9) == b.draw(5, 9));
    CHECK(a.draw(5, 9) != a.draw(6, 9));
    CHECK(a.draw(5, 9) != c.draw(5, 9));
    // prefixes agree, so a longer draw extends a shorter one
    const auto shorter = a.draw(3, 4), longer = a.draw(3, 10);
    for (std::size_t i = 0; i < 4; ++i) CHECK(shorter[i] == longer[i]);
  }

  TEST_CASE("normal draws have unit variance") {
    const NoiseStream s(2024);
    double sum = 0.0, sq = 0.0;
    const std::size_t steps = 20000, dim = 10;
    for (std::size_t k = 0; k < steps; ++k)
      for (double x : s.draw(k, dim)) {
        sum += x;
        sq += x * x;
      }
    const double n = static_cast<double>(steps * dim);
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.01);
  }

  TEST_CASE("uniform draws stay in range") {
    CounterRng rng(1);
    for (int i = 0; i < 10000; ++i) {
      const double u = rng.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(rng.index(7) < 7);
    }
  }
}
