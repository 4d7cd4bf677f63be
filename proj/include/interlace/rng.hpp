// Counter-based random streams and seed derivation.
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace interlace {

/// Philox4x32-10 (Salmon et al., SC'11). A stream is selected by its 64-bit
/// key; the 128-bit counter indexes positions inside the stream, so streams
/// with different keys are independent by construction.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  explicit Philox4x32(std::uint64_t key = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Skip `n` 64-bit outputs.
  void discard(std::uint64_t n);

  std::uint64_t key() const { return (std::uint64_t{key_[1]} << 32) | key_[0]; }

  static constexpr std::string_view name() { return "philox4x32-10"; }

 private:
  void refill();

  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> block_{};
  int next_word_ = 4;
};

using Rng = Philox4x32;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform double in (0, 1].
inline double uniform_open01(Rng& rng) { return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53; }

/// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Stream seed for (master seed, replica index, module tag).
///
///   base = mix64(master ^ mix64(fnv1a64(tag)))
///   seed = mix64(base + replica * 0x9E3779B97F4A7C15)
///
/// For a fixed (master, tag) the map replica -> seed is injective (odd
/// multiplier, bijective finalizer), so replicas never share a stream.
/// This derivation is part of the output format and must not change.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replica, std::string_view tag) {
  const std::uint64_t base = mix64(master ^ mix64(fnv1a64(tag)));
  return mix64(base + replica * 0x9E3779B97F4A7C15ULL);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t replica, std::string_view tag) {
  return Rng(derive_seed(master, replica, tag));
}

}  // namespace interlace
