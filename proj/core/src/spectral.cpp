#include "cocopnp/spectral.hpp"

#include <cmath>
#include <memory>
#include <random>

#include "cocopnp/errors.hpp"
#include "cocopnp/rng.hpp"

namespace cocopnp {

MatrixFreeMap MatrixFreeMap::from_matrix(Eigen::MatrixXd m) {
  auto shared = std::make_shared<const Eigen::MatrixXd>(std::move(m));
  MatrixFreeMap map;
  map.dimension = shared->cols();
  map.action = [shared](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return *shared * v;
  };
  map.adjoint_action = [shared](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return shared->transpose() * v;
  };
  return map;
}

namespace {

Eigen::VectorXd random_unit(Eigen::Index n, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = normal(rng);
  const double len = q.norm();
  if (!(len > 1e-300) || !std::isfinite(len)) return Eigen::VectorXd();
  return q / len;
}

}  // namespace

PowerIterationResult power_iteration(const MatrixFreeMap& m, int iterations,
                                     std::uint64_t seed,
                                     double early_stop_delta) {
  if (iterations < 1) throw DomainError("power iteration needs n >= 1");
  if (m.dimension < 1) throw DomainError("power iteration needs dimension >= 1");

  Eigen::VectorXd q;
  for (int attempt = 0; attempt <= 3 && q.size() == 0; ++attempt) {
    q = random_unit(m.dimension,
                    attempt == 0 ? seed : derive_seed(seed, attempt));
  }
  if (q.size() == 0) {
    throw NumericalError("power iteration: degenerate start vector after 3 restarts");
  }

  PowerIterationResult result;
  Eigen::VectorXd mq = m.action(q);
  double rayleigh = mq.squaredNorm();
  double previous = rayleigh;
  int done = 0;
  while (done < iterations) {
    const Eigen::VectorXd z = m.adjoint_action(mq);
    const double len = z.norm();
    if (!std::isfinite(len)) {
      throw NumericalError("power iteration produced a non-finite iterate");
    }
    if (len == 0.0) {
      // m^T m annihilates the iterate: the spectral norm is 0 here.
      rayleigh = 0.0;
      previous = 0.0;
      ++done;
      break;
    }
    q = z / len;
    mq = m.action(q);
    previous = rayleigh;
    rayleigh = mq.squaredNorm();
    ++done;
    if (early_stop_delta > 0.0 &&
        std::fabs(rayleigh - previous) < early_stop_delta) {
      break;
    }
  }

  result.rayleigh = rayleigh;
  result.value = std::sqrt(rayleigh);
  result.vector = q;
  const double mq_len = mq.norm();
  result.left_vector =
      mq_len > 0.0 ? Eigen::VectorXd(mq / mq_len)
                   : Eigen::VectorXd(Eigen::VectorXd::Zero(mq.size()));
  result.iterations = done;
  result.last_rayleigh_delta = std::fabs(rayleigh - previous);
  if (mq.size() == q.size()) result.raw_rayleigh = q.dot(mq);
  return result;
}

MatrixFreeMap cocoercivity_map(const Denoiser& d, const Image& x, double sigma,
                               double gamma) {
  MatrixFreeMap map;
  map.dimension = x.size();
  const Shape shape = x.shape();
  map.action = [&d, x, sigma, gamma, shape](const Eigen::VectorXd& v) {
    const Image vi(shape, v);
    return Eigen::VectorXd(2.0 * gamma * d.jvp(x, vi, sigma).values() - v);
  };
  map.adjoint_action = [&d, x, sigma, gamma, shape](const Eigen::VectorXd& v) {
    const Image vi(shape, v);
    return Eigen::VectorXd(2.0 * gamma * d.vjp(x, vi, sigma).values() - v);
  };
  return map;
}

MatrixFreeMap symmetry_map(const Denoiser& d, const Image& x, double sigma) {
  MatrixFreeMap map;
  map.dimension = x.size();
  const Shape shape = x.shape();
  map.action = [&d, x, sigma, shape](const Eigen::VectorXd& v) {
    const Image vi(shape, v);
    return Eigen::VectorXd(d.jvp(x, vi, sigma).values() -
                           d.vjp(x, vi, sigma).values());
  };
  // J - J^T is anti-self-adjoint.
  map.adjoint_action = [&d, x, sigma, shape](const Eigen::VectorXd& v) {
    const Image vi(shape, v);
    return Eigen::VectorXd(d.vjp(x, vi, sigma).values() -
                           d.jvp(x, vi, sigma).values());
  };
  return map;
}

SpectralReport cocoercivity_norm(const Denoiser& d, const Image& x,
                                 double sigma, double gamma, int iterations,
                                 std::uint64_t seed,
                                 double early_stop_delta) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const PowerIterationResult r = power_iteration(
      cocoercivity_map(d, x, sigma, gamma), iterations, seed, early_stop_delta);
  SpectralReport report;
  report.norm_coco = r.value;
  report.iterations_used = r.iterations;
  report.last_rayleigh_delta = r.last_rayleigh_delta;
  report.gamma = gamma;
  report.point = x;
  return report;
}

SpectralReport symmetry_error(const Denoiser& d, const Image& x, double sigma,
                              int iterations, std::uint64_t seed,
                              double early_stop_delta) {
  const PowerIterationResult r = power_iteration(
      symmetry_map(d, x, sigma), iterations, seed, early_stop_delta);
  SpectralReport report;
  report.norm_symmetry = r.value;
  report.iterations_used = r.iterations;
  report.last_rayleigh_delta = r.last_rayleigh_delta;
  report.point = x;
  return report;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> helmholtz_split(
    const Eigen::MatrixXd& j) {
  if (j.rows() != j.cols()) {
    throw ShapeError("helmholtz_split needs a square matrix");
  }
  Eigen::MatrixXd s = 0.5 * (j + j.transpose());
  Eigen::MatrixXd a = 0.5 * (j - j.transpose());
  return {std::move(s), std::move(a)};
}

double hamiltonian_defect(const Denoiser& d, const Image& x, const Image& y,
                          double sigma) {
  require_same_shape(x, y, "hamiltonian_defect");
  const Image residual = d.apply(y, sigma) - x;
  return dot(residual, d.vjp(y, residual, sigma));
}

}  // namespace cocopnp
