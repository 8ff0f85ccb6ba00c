#pragma once

#include <cstdint>

#include "cocopnp/image.hpp"
#include "cocopnp/linear_operator.hpp"
#include "cocopnp/rng.hpp"

namespace cocopnp {

/// Poisson corruption parameters: f ~ Poisson(peak * K x) / peak.
struct NoiseSpec {
  double peak = 1.0;
  std::uint64_t seed = 0;
};

/// One Poisson(mean) draw. Inversion by sequential search for mean < 30,
/// Hormann's transformed rejection (PTRS) for mean >= 30.
std::uint64_t sample_poisson(double mean, Xoshiro256& rng);

/// Draws pixels in storage order from a single generator seeded with
/// spec.seed, so the output is a pure function of (x, spec, op).
Image simulate_poisson(const Image& x, const NoiseSpec& spec,
                       const LinearOperator& op);

/// PSNR in dB; returns 99 when the MSE is below 1e-12.
double psnr(const Image& a, const Image& b, double peak = 1.0);

inline constexpr double kPsnrCap = 99.0;

}  // namespace cocopnp
