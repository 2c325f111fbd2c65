#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace oploop {

// Stateless seed scrambler (splitmix64 finalizer, Steele/Lea/Flood).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives a well-scrambled seed for the substream (a, b).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64_next(s) ^ b;
  return splitmix64_next(h);
}

// Reserved substream ids. Population biases come from kBiasStreamId so that
// growing the population never reshuffles existing users; reference draws
// (sampling a continuous law for a comparison) use kReferenceStreamId.
inline constexpr std::uint64_t kBiasStreamId = ~std::uint64_t{0};
inline constexpr std::uint64_t kReferenceStreamId = ~std::uint64_t{1};

// xoshiro256++ (Blackman & Vigna, public domain), state expanded from a
// 64-bit seed via splitmix64. Self-contained so that streams are
// bit-reproducible across platforms and independent of evaluation order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  static RngStream substream(std::uint64_t master, std::uint64_t stream_id) {
    return RngStream(mix_seed(master, stream_id));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1], safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal, Box-Muller cosine branch. Consumes exactly two words
  // per call, which keeps the draw count per event fixed.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static constexpr double kTwoPi = 6.283185307179586;

  std::uint64_t s_[4];
};

}  // namespace oploop
