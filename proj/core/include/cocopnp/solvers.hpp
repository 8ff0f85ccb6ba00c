#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "cocopnp/denoiser.hpp"
#include "cocopnp/poisson_fidelity.hpp"

namespace cocopnp {

struct SolverConfig {
  /// Denoiser strength; the splitting parameter is beta = 1/sigma^2.
  double sigma = 0.1;
  double gamma = 0.5;
  double t = 0.2;
  int max_iter = 200;
  double stop_tol = 1e-6;
  InnerAdmmConfig inner;
  /// ADMM: require t < t0(gamma) and a positive descent margin. PEGD:
  /// require 1/beta below the step bound.
  bool enforce_theory = false;
  /// PEGD only: gradient step 1/beta_override instead of sigma^2.
  std::optional<double> beta_override;

  double beta() const { return 1.0 / (sigma * sigma); }
};

struct TraceRecord {
  int iter = 0;
  /// ||u^{k+1} - u^k|| / ||u^k||.
  double rel_change = 0.0;
  double psnr = std::numeric_limits<double>::quiet_NaN();
  double fidelity = 0.0;
  /// ADMM: L_beta(u,v,b). PEGD: F(u) + (beta/beta_step) 1G(u).
  /// NaN without an explicit potential.
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
  /// Wall time since the solver started.
  double millis = 0.0;
  double delta_u = 0.0;
  double delta_v = 0.0;
};

struct SolverTrace {
  std::vector<TraceRecord> records;
  /// Lyapunov value at the initial iterate (NaN when unavailable).
  double initial_lyapunov = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;

  int iterations() const { return static_cast<int>(records.size()); }
};

struct AdmmResult {
  Image u;
  Image v;
  Image b;
  SolverTrace trace;
};

struct PegdResult {
  Image u;
  SolverTrace trace;
};

/// Starting point u0: f itself, or f replicated over each block when K
/// decimates.
Image initial_estimate(const PoissonFidelity& g);

/// u = Prox_{G/beta}(v - b); v = D^t(u + b); b = b + u - v, from u = v = f
/// and b = 0. Throws ConfigError for invalid settings, a gamma above the
/// denoiser's claim, or (with enforce_theory) t >= t0 or a nonpositive
/// descent margin.
AdmmResult coco_admm(const PoissonFidelity& g, const Denoiser& d,
                     const SolverConfig& cfg,
                     const std::optional<Image>& reference = std::nullopt);

/// u = D^t(u - beta^{-1} grad 1G(u)) from u = f. Accepts t = 1.
PegdResult coco_pegd(const PoissonFidelity& g, const Denoiser& d,
                     const SolverConfig& cfg,
                     const std::optional<Image>& reference = std::nullopt);

/// F(v) + G(u) + beta <b, u - v> + (beta/2) ||u - v||^2.
double lyapunov_value(const Image& u, const Image& v, const Image& b,
                      const Potential& f, const PoissonFidelity& g,
                      double beta);

/// CSV with header iter,rel_change,psnr,fidelity,lyapunov,millis. NaN
/// fields are written empty.
void write_trace_csv(std::ostream& out, const SolverTrace& trace);

}  // namespace cocopnp
