#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace negbias {

// std::uniform_int_distribution and std::shuffle are implementation-defined;
// seeded artifacts must be identical across standard libraries, so the
// stream and the draws are spelled out here.

/// FNV-1a over the bytes of `s`.
constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// SplitMix64 generator.
class SeededStream {
 public:
  explicit constexpr SeededStream(std::uint64_t seed) : state_(seed) {}

  /// Stream keyed by a seed plus a textual purpose and an integer slot, so
  /// independent decisions about the same sample never share draws.
  SeededStream(std::uint64_t seed, std::string_view purpose, std::string_view key,
               std::uint64_t slot = 0)
      : state_(mix(seed ^ mix(fnv1a(key, fnv1a(purpose)) + slot))) {}

  constexpr std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  constexpr std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  template <class T>
  constexpr void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace negbias
