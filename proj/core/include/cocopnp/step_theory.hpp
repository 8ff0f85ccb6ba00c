#pragma once

#include <cstdint>
#include <limits>

#include "cocopnp/denoiser.hpp"

namespace cocopnp {

struct TheoryParams {
  double gamma = 0.5;
  double t = 0.0;
  double beta = 1.0;

  static TheoryParams from_sigma(double gamma, double t, double sigma) {
    return {gamma, t, 1.0 / (sigma * sigma)};
  }
};

struct ModulusReport {
  double gamma = 0.0;
  double t = 0.0;
  double beta = 0.0;
  /// Weak-convexity modulus of F (absolute, carries beta).
  double r = 0.0;
  /// Lipschitz constant of the subgradient of F (absolute).
  double L = 0.0;
  int case_index = 1;
  /// Positive root of (2-2g)t^3 + g t^2 + 2g t - g; NaN when gamma >= 1.
  double t0 = std::numeric_limits<double>::quiet_NaN();
  double admm_margin = 0.0;
  /// max{2/(1+r/beta), 1}.
  double pegd_step_bound = 0.0;

  double r_normalized = 0.0;
  double L_normalized = 0.0;
  /// max{2/(1+r), 1} with the absolute r.
  double pegd_step_bound_absolute = 0.0;

  /// gamma in (0,1) and t in [0,1).
  bool in_admm_range = false;
  /// gamma in [0.25,1] and t in (0,1].
  bool in_pegd_range = false;
  /// gamma = 1, or t < t0 with a positive margin.
  bool admm_descent = false;
  /// 1/beta < pegd_step_bound.
  bool pegd_step_ok = false;
};

/// Unique positive root of (2-2g)t^3 + g t^2 + 2g t - g = 0 by bisection on
/// [0,1] to 1e-12. Throws DomainError unless 0 < gamma < 1.
double solve_t0(double gamma);

/// t at which the two branches of L meet, (1-2g)/(2-2g); -inf when gamma = 1.
double case_boundary(double gamma);

/// r(t) = beta t (1-g) / (t + g - g t). Valid for t in [0,1].
double weak_convexity_modulus(double gamma, double t, double beta);

/// max{2/(1+r_normalized), 1}.
double pegd_step_bound(double r_normalized);

/// Throws DomainError unless gamma in (0,1], t in [0,1), beta > 0.
ModulusReport moduli(const TheoryParams& p);

/// beta/2 - r/2 - L^2/beta.
double admm_margin(const TheoryParams& p);

struct ProxPropertyReport {
  int samples = 0;
  double r = 0.0;
  double L = 0.0;
  double tolerance = 0.0;
  /// Largest shortfall in <beta(x-u) - beta(y-v), u-v> >= -r ||u-v||^2.
  double worst_weak_monotonicity = 0.0;
  /// Largest excess in ||beta(x-u) - beta(y-v)|| <= L ||u-v||.
  double worst_lipschitz = 0.0;
  int weak_monotonicity_violations = 0;
  int lipschitz_violations = 0;

  bool passed() const {
    return weak_monotonicity_violations == 0 && lipschitz_violations == 0;
  }
};

/// Checks on random pairs that D^t behaves like Prox_{F/beta} of an
/// r-weakly convex F with L-Lipschitz subgradient, using r and L from
/// moduli(p). Inputs are drawn uniformly from [0,1] in the given shape.
ProxPropertyReport verify_prox_property(const Denoiser& d,
                                        const TheoryParams& p, double sigma,
                                        const Shape& shape, int samples,
                                        std::uint64_t seed,
                                        double tolerance = 1e-8);

}  // namespace cocopnp
