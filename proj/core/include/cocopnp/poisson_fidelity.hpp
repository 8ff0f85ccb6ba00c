#pragma once

#include "cocopnp/image.hpp"
#include "cocopnp/linear_operator.hpp"

namespace cocopnp {

/// G(u) = lambda <1, Ku - f log Ku>.
struct PoissonFidelity {
  Image f;
  LinearOperator K = LinearOperator::identity();
  double lambda = 1.0;

  /// Throws DomainError for negative or non-finite f or lambda < 0, and
  /// ShapeError when f does not match K's output shape for `u_shape`.
  void validate(const Shape& u_shape) const;
};

struct InnerAdmmConfig {
  double rho = 1.0;
  int T = 10;
  double cg_tol = 1e-10;
  int cg_max = 500;
};

/// argmin_y lambda (y - f log y) + (a/2)(y - z)^2 over y >= 0 for one pixel:
/// the positive root of a y^2 + (lambda - a z) y - lambda f = 0.
double poisson_scalar_prox(double z, double f, double lambda, double a);

/// Value of G at u with 0 log 0 = 0. Returns +infinity when (Ku)_i <= 0 at
/// a pixel with f_i > 0, or (Ku)_i < 0 anywhere.
double fidelity_value(const PoissonFidelity& g, const Image& u);

/// Prox_{G/beta}(z) for K = identity, pixelwise closed form.
Image prox_identity(const Image& z, const PoissonFidelity& g, double beta);

/// Prox_{G/beta}(z) by T iterations of the inner ADMM on
/// min_x (beta/2)||x - z||^2 + lambda <1, y - f log y> s.t. Kx = y.
/// Throws NumericalError when conjugate gradient fails to reach cg_tol.
Image prox_general(const Image& z, const PoissonFidelity& g, double beta,
                   const InnerAdmmConfig& cfg);

/// prox_identity when K is the identity, prox_general otherwise.
Image prox(const Image& z, const PoissonFidelity& g, double beta,
           const InnerAdmmConfig& cfg);

/// Gradient of the Moreau envelope 1G: u - Prox_G(u).
Image moreau_grad(const Image& u, const PoissonFidelity& g,
                  const InnerAdmmConfig& cfg);

/// 1G(u) = G(p) + 0.5 ||p - u||^2 with p = Prox_G(u).
double moreau_envelope(const Image& u, const PoissonFidelity& g,
                       const InnerAdmmConfig& cfg);

}  // namespace cocopnp
