#include "cocopnp/poisson_fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cocopnp/errors.hpp"

namespace cocopnp {

void PoissonFidelity::validate(const Shape& u_shape) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be nonnegative and finite");
  }
  if (!(K.output_shape(u_shape) == f.shape())) {
    throw ShapeError("observation shape " + to_string(f.shape()) +
                     " does not match K applied to " + to_string(u_shape));
  }
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double fi = f.values()[i];
    if (!(fi >= 0.0) || !std::isfinite(fi)) {
      throw DomainError("observation must be nonnegative and finite");
    }
  }
}

double fidelity_value(const PoissonFidelity& g, const Image& u) {
  const Image ku = g.K.forward(u);
  require_same_shape(ku, g.f, "fidelity_value");
  double total = 0.0;
  for (Eigen::Index i = 0; i < ku.size(); ++i) {
    const double k = ku.values()[i];
    const double fi = g.f.values()[i];
    if (fi > 0.0) {
      if (!(k > 0.0)) return std::numeric_limits<double>::infinity();
      total += k - fi * std::log(k);
    } else {
      if (k < 0.0) return std::numeric_limits<double>::infinity();
      total += k;
    }
  }
  return g.lambda * total;
}

double poisson_scalar_prox(double z, double f, double lambda, double a) {
  const double c = a * z - lambda;
  if (f <= 0.0 || lambda == 0.0) return std::max(0.0, c / a);
  const double disc = std::sqrt(c * c + 4.0 * a * lambda * f);
  if (c >= 0.0) return (c + disc) / (2.0 * a);
  return 2.0 * lambda * f / (disc - c);
}

Image prox_identity(const Image& z, const PoissonFidelity& g, double beta) {
  if (!(beta > 0.0)) throw DomainError("prox needs beta > 0");
  if (g.K.kind() != LinearOperator::Kind::identity) {
    throw DomainError("prox_identity needs K = identity");
  }
  require_same_shape(z, g.f, "prox_identity");
  if (g.lambda == 0.0) return z;
  Image u(z.shape());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    u.values()[i] = poisson_scalar_prox(z.values()[i], g.f.values()[i], g.lambda, beta);
  }
  return u;
}

namespace {

// Solves (beta I + rho K^T K) x = rhs by conjugate gradient from x0.
Image conjugate_gradient(const LinearOperator& k, double beta, double rho,
                         const Image& rhs, Image x, const InnerAdmmConfig& cfg) {
  const auto apply = [&](const Image& p) {
    return beta * p + rho * k.adjoint(k.forward(p));
  };
  Image r = rhs - apply(x);
  Image p = r;
  double rr = squared_norm(r);
  const double target = cfg.cg_tol * cfg.cg_tol * std::max(squared_norm(rhs), 1e-300);
  for (int it = 0; it < cfg.cg_max; ++it) {
    if (rr <= target) return x;
    const Image ap = apply(p);
    const double alpha = rr / dot(p, ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_next = squared_norm(r);
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  if (rr <= target) return x;
  throw NumericalError("conjugate gradient did not converge in " +
                       std::to_string(cfg.cg_max) + " iterations, residual " +
                       std::to_string(std::sqrt(rr / std::max(squared_norm(rhs), 1e-300))));
}

}  // namespace

Image prox_general(const Image& z, const PoissonFidelity& g, double beta,
                   const InnerAdmmConfig& cfg) {
  if (!(beta > 0.0)) throw DomainError("prox needs beta > 0");
  if (!(cfg.rho > 0.0)) throw DomainError("inner ADMM needs rho > 0");
  if (cfg.T < 1) throw DomainError("inner ADMM needs T >= 1");
  const Shape out = g.K.output_shape(z.shape());
  if (!(out == g.f.shape())) {
    throw ShapeError("observation shape does not match K z");
  }
  if (g.lambda == 0.0) return z;

  const double rho = cfg.rho;
  Image x = z;
  Image y = g.K.forward(z);
  Image w(out);
  for (int i = 0; i < cfg.T; ++i) {
    const Image rhs = beta * z + rho * g.K.adjoint(y - w);
    if (auto direct = g.K.solve_normal(beta, rho, rhs)) {
      x = std::move(*direct);
    } else {
      x = conjugate_gradient(g.K, beta, rho, rhs, std::move(x), cfg);
    }
    const Image kx = g.K.forward(x);
    const Image s = kx + w;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      y.values()[j] = poisson_scalar_prox(s.values()[j], g.f.values()[j], g.lambda, rho);
    }
    w += kx - y;
  }
  return x;
}

Image prox(const Image& z, const PoissonFidelity& g, double beta,
           const InnerAdmmConfig& cfg) {
  if (g.K.kind() == LinearOperator::Kind::identity) {
    return prox_identity(z, g, beta);
  }
  return prox_general(z, g, beta, cfg);
}

Image moreau_grad(const Image& u, const PoissonFidelity& g,
                  const InnerAdmmConfig& cfg) {
  return u - prox(u, g, 1.0, cfg);
}

double moreau_envelope(const Image& u, const PoissonFidelity& g,
                       const InnerAdmmConfig& cfg) {
  const Image p = prox(u, g, 1.0, cfg);
  return fidelity_value(g, p) + 0.5 * squared_norm(p - u);
}

}  // namespace cocopnp
