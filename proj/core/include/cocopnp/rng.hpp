#pragma once

#include <cstdint>
#include <limits>

namespace cocopnp {

/// SplitMix64 step; used for seeding and for deriving child seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent stream seed from a root seed and a stream id.
/// Rule: splitmix64 applied to root ^ (stream * 0x9E3779B97F4A7C15).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

/// xoshiro256** 1.0 generator. Satisfies UniformRandomBitGenerator, so it
/// can drive the standard distributions.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t s_[4];
};

}  // namespace cocopnp
