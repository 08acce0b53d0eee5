// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "wishart/rng.hpp"

using namespace wishart::rng;

TEST_CASE("philox4x32-10 known answers") {
  // Reference vectors published with the Random123 distribution.
  CHECK(philox({0, 0, 0, 0}, {0, 0}) == Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniforms lie in (0, 1] and streams differ") {
  const Key a = make_key(7, Stream::kNoise);
  const Key b = make_key(7, Stream::kLabels);
  const Key c = make_key(8, Stream::kNoise);
  CHECK(a != b);
  CHECK(a != c);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto [u, v] = uniforms(entry_counter(0, i, 0), a);
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("entry counters are distinct across replicates and coordinates") {
  std::set<Counter> seen;
  for (std::uint64_t r = 0; r < 4; ++r)
    for (std::uint64_t i = 0; i < 8; ++i)
      for (std::uint64_t j = 0; j < 8; ++j) seen.insert(entry_counter(r, i, j));
  CHECK(seen.size() == 4 * 8 * 8);
  CHECK(entry_counter(1ull << 32, 0, 0) != entry_counter(0, 0, 0));
}

TEST_CASE("counter stream is reproducible") {
  CounterStream s1(42, Stream::kProfileGeneration, 3);
  CounterStream s2(42, Stream::kProfileGeneration, 3);
  for (int k = 0; k < 10; ++k) CHECK(s1.next_normal() == s2.next_normal());
}

TEST_CASE("normals have unit variance") {
  const Key key = make_key(1, Stream::kTestMatrices);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto g = normals(entry_counter(0, static_cast<std::uint64_t>(i), 0), key);
    sum += g[0] + g[1];
    sum2 += g[0] * g[0] + g[1] * g[1];
  }
  const double mean = sum / (2.0 * n);
  const double var = sum2 / (2.0 * n);
  CHECK(std::abs(mean) < 5.0 / std::sqrt(2.0 * n));
  CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / (2.0 * n)));
}
