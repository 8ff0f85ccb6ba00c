#include "cocopnp/step_theory.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cocopnp/errors.hpp"
#include "cocopnp/rng.hpp"

namespace cocopnp {

double solve_t0(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("solve_t0 needs 0 < gamma < 1");
  }
  const auto h = [gamma](double t) {
    return ((2.0 - 2.0 * gamma) * t + gamma) * t * t + 2.0 * gamma * t - gamma;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double case_boundary(double gamma) {
  if (gamma >= 1.0) return -std::numeric_limits<double>::infinity();
  return (1.0 - 2.0 * gamma) / (2.0 - 2.0 * gamma);
}

double weak_convexity_modulus(double gamma, double t, double beta) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0,1]");
  return beta * t * (1.0 - gamma) / (t + gamma - gamma * t);
}

double pegd_step_bound(double r_normalized) {
  return std::max(2.0 / (1.0 + r_normalized), 1.0);
}

ModulusReport moduli(const TheoryParams& p) {
  if (!(p.gamma > 0.0 && p.gamma <= 1.0)) {
    throw DomainError("gamma must lie in (0,1]");
  }
  if (!(p.t >= 0.0 && p.t < 1.0)) {
    throw DomainError("t must lie in [0,1); L is unbounded at t = 1");
  }
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) {
    throw DomainError("beta must be positive and finite");
  }
  ModulusReport m;
  m.gamma = p.gamma;
  m.t = p.t;
  m.beta = p.beta;
  m.r = weak_convexity_modulus(p.gamma, p.t, p.beta);
  if (p.t >= case_boundary(p.gamma)) {
    m.case_index = 1;
    m.L = p.beta * p.t / (1.0 - p.t);
  } else {
    m.case_index = 2;
    m.L = m.r;
  }
  if (p.gamma < 1.0) m.t0 = solve_t0(p.gamma);
  m.admm_margin = p.beta / 2.0 - m.r / 2.0 - m.L * m.L / p.beta;
  m.r_normalized = m.r / p.beta;
  m.L_normalized = m.L / p.beta;
  m.pegd_step_bound = pegd_step_bound(m.r_normalized);
  m.pegd_step_bound_absolute = pegd_step_bound(m.r);
  m.in_admm_range = p.gamma < 1.0;
  m.in_pegd_range = p.gamma >= 0.25 && p.t > 0.0;
  // t < t0 alone does not keep the margin positive below the case boundary
  // when gamma < 0.25.
  m.admm_descent = p.gamma >= 1.0 || (p.t < m.t0 && m.admm_margin > 0.0);
  m.pegd_step_ok = 1.0 / p.beta < m.pegd_step_bound;
  return m;
}

double admm_margin(const TheoryParams& p) { return moduli(p).admm_margin; }

ProxPropertyReport verify_prox_property(const Denoiser& d,
                                        const TheoryParams& p, double sigma,
                                        const Shape& shape, int samples,
                                        std::uint64_t seed, double tolerance) {
  const ModulusReport m = moduli(p);
  ProxPropertyReport report;
  report.samples = samples;
  report.r = m.r;
  report.L = m.L;
  report.tolerance = tolerance;

  Xoshiro256 rng(seed);
  const auto draw = [&] {
    Image x(shape);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.values()[i] = rng.uniform();
    return x;
  };
  for (int s = 0; s < samples; ++s) {
    const Image x = draw();
    const Image y = draw();
    const Image u = averaged_apply(d, p.t, x, sigma);
    const Image v = averaged_apply(d, p.t, y, sigma);
    const Image g = p.beta * ((x - u) - (y - v));
    const Image du = u - v;
    const double du2 = squared_norm(du);

    const double monotone_gap = -(dot(g, du) + m.r * du2);
    report.worst_weak_monotonicity =
        std::max(report.worst_weak_monotonicity, monotone_gap);
    if (monotone_gap > tolerance) ++report.weak_monotonicity_violations;

    const double lipschitz_gap = norm(g) - m.L * std::sqrt(du2);
    report.worst_lipschitz = std::max(report.worst_lipschitz, lipschitz_gap);
    if (lipschitz_gap > tolerance) ++report.lipschitz_violations;
  }
  return report;
}

}  // namespace cocopnp
