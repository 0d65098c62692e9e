#pragma once

// Counter-based random streams.
//
// A stream is a 64-bit key. Draw number c of a stream is
//     bits(c) = mix64(key + (c + 1) * 0x9E3779B97F4A7C15)
// i.e. the SplitMix64 output sequence started from state `key`, so any draw
// can be produced without touching the others. Keys are derived as
//     key = mix64(mix64(seed) ^ fnv1a64(label) ^ mix64(index ^ 0xD1B54A32D192ED03))
// where fnv1a64 is the 64-bit FNV-1a hash (offset 0xCBF29CE484222325, prime
// 0x100000001B3) and mix64 is the SplitMix64 finalizer with multipliers
// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB (shifts 30, 27, 31).
// uniform(c) = ((bits(c) >> 11) + 0.5) * 2^-53 lies strictly inside (0, 1).
// normal(c) uses Box-Muller on the pair (uniform(2k), uniform(2k+1)), k = c/2,
// taking the cosine branch for even c and the sine branch for odd c.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace ou::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kIndexSalt = 0xD1B54A32D192ED03ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

struct StreamKey {
  std::uint64_t value = 0;
  friend constexpr bool operator==(StreamKey, StreamKey) = default;
};

constexpr StreamKey seed_stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  return StreamKey{mix64(mix64(seed) ^ fnv1a64(label) ^ mix64(index ^ kIndexSalt))};
}

class CounterStream {
 public:
  constexpr explicit CounterStream(StreamKey key) : key_(key) {}

  constexpr StreamKey key() const { return key_; }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix64(key_.value + (counter + 1) * kGolden);
  }

  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t counter) const {
    const std::uint64_t pair = counter >> 1;
    const double radius = std::sqrt(-2.0 * std::log(uniform(2 * pair)));
    const double angle = 2.0 * std::numbers::pi * uniform(2 * pair + 1);
    return (counter & 1U) ? radius * std::sin(angle) : radius * std::cos(angle);
  }

  /// Both Box-Muller outputs of pair k, i.e. normal(2k) and normal(2k+1).
  void normal_pair(std::uint64_t pair, double& first, double& second) const {
    const double radius = std::sqrt(-2.0 * std::log(uniform(2 * pair)));
    const double angle = 2.0 * std::numbers::pi * uniform(2 * pair + 1);
    first = radius * std::cos(angle);
    second = radius * std::sin(angle);
  }

 private:
  StreamKey key_;
};

/// Fills out[0..n) with normal(first), ..., normal(first + n - 1).
template <typename OutIt>
void fill_normals(const CounterStream& stream, std::uint64_t first, std::uint64_t n, OutIt out) {
  std::uint64_t c = first;
  const std::uint64_t end = first + n;
  if (c < end && (c & 1U)) {
    *out++ = stream.normal(c++);
  }
  while (c + 1 < end) {
    double a = 0.0, b = 0.0;
    stream.normal_pair(c >> 1, a, b);
    *out++ = a;
    *out++ = b;
    c += 2;
  }
  if (c < end) *out++ = stream.normal(c);
}

}  // namespace ou::rng
