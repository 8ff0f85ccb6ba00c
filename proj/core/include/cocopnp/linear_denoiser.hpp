#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "cocopnp/denoiser.hpp"

namespace cocopnp {

/// D(x) = W x + b over the flattened input. Its Jacobian is the constant W,
/// so every spectral quantity is an exact matrix norm. sigma is accepted and
/// ignored.
class LinearDenoiser final : public Denoiser {
 public:
  LinearDenoiser(Eigen::MatrixXd weight, Eigen::VectorXd offset,
                 std::optional<double> claimed_gamma = std::nullopt,
                 Shape patch = {});

  /// Symmetric W = Q diag(eigs) Q^T with a seeded random orthogonal Q and
  /// eigenvalues uniform in [eig_min, eig_max], b = 0. With
  /// 0 <= eig_min <= eig_max <= 1/gamma the result is gamma-cocoercive and
  /// conservative by construction.
  static LinearDenoiser make_certified(Shape patch, double gamma,
                                       std::uint64_t seed, double eig_min,
                                       double eig_max);
  static LinearDenoiser make_certified(Shape patch, double gamma,
                                       std::uint64_t seed) {
    return make_certified(patch, gamma, seed, 0.0, 1.0 / gamma);
  }

  Image apply(const Image& x, double sigma) const override;
  Image jvp(const Image& x, const Image& v, double sigma) const override;
  Image vjp(const Image& x, const Image& v, double sigma) const override;
  std::optional<double> claimed_gamma() const override { return gamma_; }
  std::string name() const override { return "linear"; }

  /// Quadratic F with D^t = Prox_{F/beta}; requires a symmetric W whose
  /// averaged version t W + (1-t) I is positive definite.
  std::unique_ptr<Potential> explicit_potential(double t, double beta,
                                                double sigma) const override;

  const Eigen::MatrixXd& weight() const { return weight_; }
  const Eigen::VectorXd& offset() const { return offset_; }
  Eigen::Index dimension() const { return weight_.rows(); }
  const Shape& patch_shape() const { return patch_; }

 private:
  void check(const Image& x) const;

  Eigen::MatrixXd weight_;
  Eigen::VectorXd offset_;
  std::optional<double> gamma_;
  Shape patch_;
};

}  // namespace cocopnp
