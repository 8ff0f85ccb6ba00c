#pragma once

#include "cocopnp/denoiser.hpp"

namespace cocopnp {

/// Soft thresholding in the orthonormal 2-D DCT-II basis, per channel:
/// D = C^T soft_tau C with tau = threshold_scale * sigma.
///
/// This is the exact proximal operator of x -> tau ||C x||_1, so it is
/// firmly non-expansive (1-cocoercive) and conservative.
class DctSoftThresholdDenoiser final : public Denoiser {
 public:
  explicit DctSoftThresholdDenoiser(double threshold_scale = 1.0);

  double threshold(double sigma) const { return scale_ * sigma; }

  Image apply(const Image& x, double sigma) const override;
  /// The Jacobian is C^T diag(|Cx| > tau) C; jvp and vjp coincide.
  Image jvp(const Image& x, const Image& v, double sigma) const override;
  Image vjp(const Image& x, const Image& v, double sigma) const override;
  std::optional<double> claimed_gamma() const override { return 1.0; }
  std::string name() const override { return "dct"; }

  /// F(u) = beta * sum_k huber_t((C u)_k), the potential of the averaged
  /// thresholding map; equals beta * tau * ||C u||_1 at t = 1.
  std::unique_ptr<Potential> explicit_potential(double t, double beta,
                                                double sigma) const override;

  /// Orthonormal 2-D DCT-II of every channel, and its inverse.
  static Image transform(const Image& x);
  static Image inverse_transform(const Image& coeffs);

 private:
  double scale_;
};

}  // namespace cocopnp
