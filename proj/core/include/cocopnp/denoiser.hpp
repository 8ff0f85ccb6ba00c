#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "cocopnp/image.hpp"

namespace cocopnp {

/// A prior F evaluable in closed form, together with the moduli the
/// convergence theory needs: F is r-weakly convex and its (sub)gradient is
/// L-Lipschitz. Both constants are absolute, i.e. they carry beta.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual double value(const Image& u) const = 0;
  virtual double weak_convexity() const = 0;
  virtual double gradient_lipschitz() const = 0;
};

/// Differentiable denoiser D_sigma with exact Jacobian-vector products.
///
/// Implementations are immutable after construction; all member functions
/// are pure and may be called concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual Image apply(const Image& x, double sigma) const = 0;
  /// J(x) v, where J is the Jacobian of apply(., sigma) at x.
  virtual Image jvp(const Image& x, const Image& v, double sigma) const = 0;
  /// J(x)^T v.
  virtual Image vjp(const Image& x, const Image& v, double sigma) const = 0;

  /// Cocoercivity modulus the denoiser is claimed (or built) to satisfy.
  virtual std::optional<double> claimed_gamma() const { return std::nullopt; }

  /// Returns F with t*D + (1-t)*I = Prox_{F/beta} when such an F is known in
  /// closed form, nullptr otherwise.
  virtual std::unique_ptr<Potential> explicit_potential(double t, double beta,
                                                        double sigma) const {
    (void)t;
    (void)beta;
    (void)sigma;
    return nullptr;
  }

  virtual std::string name() const = 0;
};

/// t * D(x) + (1 - t) * x. Throws DomainError unless 0 <= t <= 1.
Image averaged_apply(const Denoiser& d, double t, const Image& x, double sigma);
Image averaged_jvp(const Denoiser& d, double t, const Image& x, const Image& v,
                   double sigma);
Image averaged_vjp(const Denoiser& d, double t, const Image& x, const Image& v,
                   double sigma);

/// D^t as a Denoiser in its own right. Claims gamma / (t + gamma (1 - t))
/// when the wrapped denoiser claims gamma.
class AveragedDenoiser final : public Denoiser {
 public:
  AveragedDenoiser(std::shared_ptr<const Denoiser> inner, double t);

  Image apply(const Image& x, double sigma) const override;
  Image jvp(const Image& x, const Image& v, double sigma) const override;
  Image vjp(const Image& x, const Image& v, double sigma) const override;
  std::optional<double> claimed_gamma() const override;
  std::string name() const override;

  double t() const { return t_; }

 private:
  std::shared_ptr<const Denoiser> inner_;
  double t_;
};

/// gamma ||D(x) - D(y)||^2 - <x - y, D(x) - D(y)>; nonpositive exactly when
/// the pair satisfies the gamma-cocoercivity inequality.
double sample_cocoercivity_defect(const Denoiser& d, const Image& x,
                                  const Image& y, double sigma, double gamma);

/// Dense Jacobian assembled column by column from jvp. Intended for
/// verification on small inputs.
Eigen::MatrixXd dense_jacobian(const Denoiser& d, const Image& x, double sigma);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace cocopnp
