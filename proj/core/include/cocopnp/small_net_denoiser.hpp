#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "cocopnp/denoiser.hpp"

namespace cocopnp {

/// Two affine layers around an elementwise tanh:
///   D(y) = W2 tanh(W1 [y; sigma] + b1) + b2.
/// sigma enters as an extra input so the denoiser is noise-level aware.
///
/// Parameter vector layout (theta): W1 column-major (hidden x (n+1)), b1
/// (hidden), W2 column-major (n x hidden), b2 (n).
class SmallNetDenoiser final : public Denoiser {
 public:
  static constexpr Eigen::Index kMaxParameters = 2000;

  SmallNetDenoiser(Shape patch, Eigen::Index hidden, Eigen::VectorXd theta,
                   std::optional<double> claimed_gamma = std::nullopt);

  /// Gaussian initialization scaled by fan-in; biases start at zero.
  static SmallNetDenoiser make_random(Shape patch, Eigen::Index hidden,
                                      std::uint64_t seed);

  static Eigen::Index parameter_count(Eigen::Index n, Eigen::Index hidden) {
    return hidden * (n + 1) + hidden + n * hidden + n;
  }

  Image apply(const Image& x, double sigma) const override;
  Image jvp(const Image& x, const Image& v, double sigma) const override;
  Image vjp(const Image& x, const Image& v, double sigma) const override;
  std::optional<double> claimed_gamma() const override { return gamma_; }
  std::string name() const override { return "small-net"; }

  /// Gradient with respect to theta of <g, D(y)>, by reverse-mode chain rule.
  Eigen::VectorXd parameter_gradient(const Eigen::VectorXd& y, double sigma,
                                     const Eigen::VectorXd& g) const;

  /// p^T J(y; theta) q for an arbitrary parameter vector theta. Used to
  /// differentiate spectral penalties with respect to theta at frozen
  /// singular vectors.
  double bilinear_jacobian(const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& y, double sigma,
                           const Eigen::VectorXd& p,
                           const Eigen::VectorXd& q) const;

  SmallNetDenoiser with_parameters(Eigen::VectorXd theta) const {
    return SmallNetDenoiser(patch_, hidden_, std::move(theta), gamma_);
  }
  SmallNetDenoiser with_claimed_gamma(std::optional<double> gamma) const {
    return SmallNetDenoiser(patch_, hidden_, theta_, gamma);
  }

  const Eigen::VectorXd& parameters() const { return theta_; }
  Eigen::Index dimension() const { return n_; }
  Eigen::Index hidden() const { return hidden_; }
  const Shape& patch_shape() const { return patch_; }

 private:
  struct Layers {
    Eigen::Map<const Eigen::MatrixXd> w1;
    Eigen::Map<const Eigen::VectorXd> b1;
    Eigen::Map<const Eigen::MatrixXd> w2;
    Eigen::Map<const Eigen::VectorXd> b2;
  };
  Layers layers(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd pre_activation(const Layers& l, const Eigen::VectorXd& y,
                                 double sigma) const;
  void check(const Image& x) const;

  Shape patch_;
  Eigen::Index n_;
  Eigen::Index hidden_;
  Eigen::VectorXd theta_;
  std::optional<double> gamma_;
};

}  // namespace cocopnp
