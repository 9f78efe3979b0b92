#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace mtf {

/// xoshiro256** (Blackman and Vigna). Satisfies UniformRandomBitGenerator so it
/// can drive the <random> distributions.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  /// State filled from a SplitMix64 sequence started at key.
  explicit Xoshiro256(std::uint64_t key) {
    for (auto& w : s_) w = splitmix64(key);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Advances x and returns the next SplitMix64 output.
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
};

/// Random stream keyed by (seed, stream index). Every sample index of a batch
/// owns its own stream, so batches are reproducible in any evaluation order.
/// Construction is a handful of integer mixes, cheap enough for one stream per sample.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(key(seed, stream)) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  Xoshiro256& engine() { return engine_; }

 private:
  static std::uint64_t key(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t a = seed;
    std::uint64_t b = Xoshiro256::splitmix64(a) ^ stream;
    return Xoshiro256::splitmix64(b);
  }

  Xoshiro256 engine_;
};

}  // namespace mtf
