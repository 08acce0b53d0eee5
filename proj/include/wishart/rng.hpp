// SPDX-License-Identifier: Apache-2.0
#pragma once

// Counter-based generator (Philox4x32-10). Every random draw in the library is
// a pure function of (key, counter), so replicates can be produced on any
// worker in any order without a shared generator state.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace wishart::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kMulA = 0xD2511F53u;
inline constexpr std::uint32_t kMulB = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeylA = 0x9E3779B9u;
inline constexpr std::uint32_t kWeylB = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

constexpr Counter round(const Counter& ctr, const Key& key) {
  std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
  mulhilo(kMulA, ctr[0], hi0, lo0);
  mulhilo(kMulB, ctr[2], hi1, lo1);
  return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

/// Philox4x32 with 10 rounds.
constexpr Counter philox(Counter ctr, Key key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += detail::kWeylA;
      key[1] += detail::kWeylB;
    }
    ctr = detail::round(ctr, key);
  }
  return ctr;
}

/// SplitMix64 finalizer; used to fold stream identifiers into keys.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Logical streams sharing one master seed.
enum class Stream : std::uint64_t {
  kNoise = 1,
  kLabels = 2,
  kProfileGeneration = 3,
  kLanczosStart = 4,
  kTestMatrices = 5,
};

constexpr Key make_key(std::uint64_t master_seed, Stream stream) {
  const std::uint64_t k = mix64(master_seed ^ mix64(static_cast<std::uint64_t>(stream)));
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

/// Two independent uniforms in (0, 1], 53 bits each.
struct UniformPair {
  double first;
  double second;
};

constexpr UniformPair uniforms(const Counter& ctr, const Key& key) {
  const Counter out = philox(ctr, key);
  const std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return {static_cast<double>((a >> 11) + 1) * kScale, static_cast<double>((b >> 11) + 1) * kScale};
}

/// Box-Muller: two independent standard normals from one counter.
inline std::array<double, 2> normals(const Counter& ctr, const Key& key) {
  const auto [u1, u2] = uniforms(ctr, key);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Counter layout for entry (i, j) of replicate r.
constexpr Counter entry_counter(std::uint64_t replicate, std::uint64_t i, std::uint64_t j) {
  return {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
          static_cast<std::uint32_t>(replicate),
          static_cast<std::uint32_t>(replicate >> 32) ^
              (static_cast<std::uint32_t>(i >> 32) << 16) ^ static_cast<std::uint32_t>(j >> 32)};
}

/// Sequential convenience wrapper over a counter stream; each call to next_*
/// consumes one counter value.
class CounterStream {
 public:
  CounterStream(std::uint64_t master_seed, Stream stream, std::uint64_t index = 0)
      : key_(make_key(master_seed, stream)), index_(index) {}

  UniformPair next_uniforms() {
    return uniforms(entry_counter(index_, position_++, 0xFFFFFFFFu), key_);
  }
  double next_uniform() { return next_uniforms().first; }
  double next_normal() {
    return normals(entry_counter(index_, position_++, 0xFFFFFFFFu), key_)[0];
  }

 private:
  Key key_;
  std::uint64_t index_;
  std::uint64_t position_ = 0;
};

}  // namespace wishart::rng
