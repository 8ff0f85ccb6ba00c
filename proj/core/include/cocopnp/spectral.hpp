#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "cocopnp/denoiser.hpp"

namespace cocopnp {

/// Default power-iteration budget while training.
inline constexpr int kTrainingPowerIterations = 30;
/// Budget and early-stop threshold for certification runs.
inline constexpr int kCertificationPowerIterations = 200;
inline constexpr double kCertificationEarlyStop = 1e-10;

/// A linear map known only through its action and adjoint action.
struct MatrixFreeMap {
  Eigen::Index dimension = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> action;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> adjoint_action;

  static MatrixFreeMap from_matrix(Eigen::MatrixXd m);
};

struct PowerIterationResult {
  /// Spectral-norm estimate sqrt(lambda_N).
  double value = 0.0;
  /// Rayleigh quotient lambda_N = ||m q_N||^2 of the symmetrized map m^T m.
  double rayleigh = 0.0;
  /// Final unit iterate q_N (top right singular vector estimate).
  Eigen::VectorXd vector;
  /// m q_N / ||m q_N||, zero when the map annihilates q_N.
  Eigen::VectorXd left_vector;
  int iterations = 0;
  /// |lambda_N - lambda_{N-1}|.
  double last_rayleigh_delta = 0.0;
  /// q_N^T m q_N, the raw Rayleigh quotient of the unsymmetrized map.
  /// Only bounds the spectral radius; kept as a diagnostic.
  double raw_rayleigh = 0.0;
};

/// Power iteration on m^T m from a seeded unit-normalized Gaussian start.
/// Runs `iterations` steps, stopping early once the Rayleigh change drops
/// below `early_stop_delta` (disabled when 0). A degenerate start vector is
/// redrawn up to three times before NumericalError. A map that annihilates
/// the iterate has norm estimate 0.
PowerIterationResult power_iteration(const MatrixFreeMap& m, int iterations,
                                     std::uint64_t seed,
                                     double early_stop_delta = 0.0);

/// Spectral certificates of a denoiser at one point.
struct SpectralReport {
  double norm_coco = std::numeric_limits<double>::quiet_NaN();
  double norm_symmetry = std::numeric_limits<double>::quiet_NaN();
  int iterations_used = 0;
  double last_rayleigh_delta = 0.0;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  Image point;
};

/// Matrix-free 2 gamma J(x) - I and J(x) - J(x)^T. The maps keep a
/// reference to `d`, which must outlive them.
MatrixFreeMap cocoercivity_map(const Denoiser& d, const Image& x, double sigma,
                               double gamma);
MatrixFreeMap symmetry_map(const Denoiser& d, const Image& x, double sigma);

/// ||2 gamma J(x) - I||; the denoiser is certified gamma-cocoercive at x when
/// the estimate is <= 1.
SpectralReport cocoercivity_norm(const Denoiser& d, const Image& x,
                                 double sigma, double gamma, int iterations,
                                 std::uint64_t seed,
                                 double early_stop_delta = 0.0);

/// ||J(x) - J(x)^T||; zero exactly for conservative denoisers.
SpectralReport symmetry_error(const Denoiser& d, const Image& x, double sigma,
                              int iterations, std::uint64_t seed,
                              double early_stop_delta = 0.0);

/// J = S + A with S = (J + J^T)/2 and A = (J - J^T)/2.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> helmholtz_split(
    const Eigen::MatrixXd& j);

/// <D(y) - x, J(y)^T (D(y) - x)>, the rate of change of the Hamiltonian
/// functional 0.5 ||D(y) - x||^2 along D(y) - x. Zero when S(y) = 0.
double hamiltonian_defect(const Denoiser& d, const Image& x, const Image& y,
                          double sigma);

}  // namespace cocopnp
