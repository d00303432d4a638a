#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "gpsm/errors.hpp"

namespace gpsm {

/// splitmix64 finalizer; bijective 64-bit mixer.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Purpose tags for the counter-based substream derivation. Streams with
/// different tags are independent even for equal counters, which is what lets
/// paired policies share channel/noise/bit streams while consuming their own.
enum class Stream : std::uint64_t {
  channel = 1,
  noise = 2,
  data_bits = 3,
  pattern_draw = 4,
  notification_noise = 5,
};

/// Derives a substream seed from the master seed and up to two counters
/// (typically realization index and the bit pattern of the SNR grid value).
/// Each stage folds its field as s * C + field before remixing; the fold is
/// not commutative across stages, so no (master, stream, a, b) permutation
/// can alias another tuple's seed the way a plain xor of mixed fields would.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                           std::uint64_t a = 0,
                                           std::uint64_t b = 0) noexcept {
  constexpr std::uint64_t kFold = 0xd1342543de82ef95ULL;  // odd, so s * kFold is bijective
  std::uint64_t s = mix64(master);
  s = mix64(s * kFold + static_cast<std::uint64_t>(stream));
  s = mix64(s * kFold + a);
  s = mix64(s * kFold + b);
  return s;
}

/// Deterministic random source. Wraps std::mt19937_64 (bit-exact across
/// implementations) and hand-rolls the distributions so that results do not
/// depend on the standard library's unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Unbiased uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw ConfigError("Rng::below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  /// n uniform random bits packed into the low bits, MSB drawn first. n <= 32.
  std::uint32_t bit_block(int n) {
    if (n == 0) return 0;
    return static_cast<std::uint32_t>(engine_() >> (64 - n));
  }

  /// Circularly-symmetric complex Gaussian CN(0, 1): real and imaginary parts
  /// each N(0, 1/2). Box-Muller on two hand-rolled uniforms.
  std::complex<double> cgaussian() {
    const double r = std::sqrt(-std::log(uniform_pos()));
    const double th = 2.0 * M_PI * uniform();
    return {r * std::cos(th), r * std::sin(th)};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gpsm
