#include "cocopnp/noise.hpp"

#include <cmath>
#include <string>

#include "cocopnp/errors.hpp"

namespace cocopnp {

namespace {

std::uint64_t poisson_inversion(double mean, Xoshiro256& rng) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  // The tail beyond 1000 has negligible mass for mean < 30.
  while (u > cdf && k < 1000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

std::uint64_t poisson_ptrs(double mean, Xoshiro256& rng) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

std::uint64_t sample_poisson(double mean, Xoshiro256& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("Poisson mean must be finite and nonnegative");
  }
  if (mean == 0.0) return 0;
  return mean < 30.0 ? poisson_inversion(mean, rng) : poisson_ptrs(mean, rng);
}

Image simulate_poisson(const Image& x, const NoiseSpec& spec,
                       const LinearOperator& op) {
  if (!(spec.peak > 0.0)) throw DomainError("peak must be positive");
  const Image mean = op.forward(x);
  Xoshiro256 rng(spec.seed);
  Image f = Image::zeros_like(mean);
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double m = mean.values()[i];
    // Rounding in the FFT can leave tiny negatives for nonnegative inputs.
    if (m < -1e-12) {
      throw DomainError("negative mean pixel " + std::to_string(m) +
                        " at index " + std::to_string(i));
    }
    const double lambda = spec.peak * std::max(m, 0.0);
    f.values()[i] =
        static_cast<double>(sample_poisson(lambda, rng)) / spec.peak;
  }
  return f;
}

double psnr(const Image& a, const Image& b, double peak) {
  require_same_shape(a, b, "psnr");
  if (a.size() == 0) throw ShapeError("psnr of empty images");
  const double mse = (a.values() - b.values()).squaredNorm() /
                     static_cast<double>(a.size());
  if (mse < 1e-12) return kPsnrCap;
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace cocopnp
