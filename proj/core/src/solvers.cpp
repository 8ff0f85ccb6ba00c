#include "cocopnp/solvers.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

#include "cocopnp/errors.hpp"
#include "cocopnp/noise.hpp"
#include "cocopnp/step_theory.hpp"

namespace cocopnp {

namespace {

void check_common(const PoissonFidelity& g, const Denoiser& d,
                  const SolverConfig& cfg, double t_max) {
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) {
    throw ConfigError("sigma must be positive");
  }
  if (!(cfg.t >= 0.0 && cfg.t <= t_max)) {
    throw ConfigError(t_max < 1.0 ? "t must lie in [0,1)" : "t must lie in [0,1]");
  }
  if (!(cfg.stop_tol > 0.0)) throw ConfigError("stop_tol must be positive");
  if (cfg.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (cfg.beta_override && !(*cfg.beta_override > 0.0)) {
    throw ConfigError("beta override must be positive");
  }
  if (auto claimed = d.claimed_gamma()) {
    // gamma-cocoercive implies gamma'-cocoercive for every gamma' <= gamma.
    if (cfg.gamma - *claimed > 1e-12 * std::max(1.0, *claimed)) {
      throw ConfigError("gamma " + std::to_string(cfg.gamma) +
                        " exceeds the denoiser's claimed gamma " +
                        std::to_string(*claimed));
    }
  } else if (cfg.enforce_theory) {
    throw ConfigError("enforce_theory needs a denoiser with a claimed gamma");
  }
  if (cfg.enforce_theory && cfg.gamma > 1.0) {
    throw ConfigError("theory needs gamma in (0,1]");
  }
  try {
    g.validate(initial_estimate(g).shape());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

double relative_change(const Image& next, const Image& prev) {
  const double diff = norm(next - prev);
  if (diff == 0.0) return 0.0;
  const double base = norm(prev);
  return base > 0.0 ? diff / base : kInfinity;
}

void require_finite(const Image& x, const char* what) {
  if (!x.all_finite()) {
    throw NumericalError(std::string("non-finite iterate in ") + what);
  }
}

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

Image initial_estimate(const PoissonFidelity& g) {
  if (g.K.kind() != LinearOperator::Kind::decimation) return g.f;
  const std::uint32_t s = g.K.factor();
  Image u(Shape{g.f.height() * s, g.f.width() * s, g.f.channels()});
  for (std::uint32_t i = 0; i < u.height(); ++i) {
    for (std::uint32_t j = 0; j < u.width(); ++j) {
      for (std::uint32_t c = 0; c < u.channels(); ++c) {
        u.at(i, j, c) = g.f.at(i / s, j / s, c);
      }
    }
  }
  return u;
}

double lyapunov_value(const Image& u, const Image& v, const Image& b,
                      const Potential& f, const PoissonFidelity& g,
                      double beta) {
  const Image diff = u - v;
  return f.value(v) + fidelity_value(g, u) + beta * dot(b, diff) +
         0.5 * beta * squared_norm(diff);
}

AdmmResult coco_admm(const PoissonFidelity& g, const Denoiser& d,
                     const SolverConfig& cfg,
                     const std::optional<Image>& reference) {
  check_common(g, d, cfg, std::nextafter(1.0, 0.0));
  if (cfg.enforce_theory && cfg.gamma < 1.0 && !(cfg.t < solve_t0(cfg.gamma))) {
    throw ConfigError("t = " + std::to_string(cfg.t) +
                      " is not below t0 = " + std::to_string(solve_t0(cfg.gamma)));
  }
  if (cfg.enforce_theory && cfg.gamma < 1.0 &&
      !(admm_margin({cfg.gamma, cfg.t, cfg.beta()}) > 0.0)) {
    throw ConfigError("descent margin at gamma = " + std::to_string(cfg.gamma) +
                      ", t = " + std::to_string(cfg.t) + " is not positive");
  }
  const double beta = cfg.beta();
  const auto potential = d.explicit_potential(cfg.t, beta, cfg.sigma);

  const auto start = Clock::now();
  AdmmResult res;
  res.u = initial_estimate(g);
  res.v = res.u;
  res.b = Image::zeros_like(res.u);
  if (reference) require_same_shape(*reference, res.u, "reference");
  if (potential) {
    res.trace.initial_lyapunov =
        lyapunov_value(res.u, res.v, res.b, *potential, g, beta);
  }

  for (int k = 0; k < cfg.max_iter; ++k) {
    Image u = prox(res.v - res.b, g, beta, cfg.inner);
    require_finite(u, "the u-update");
    Image v = averaged_apply(d, cfg.t, u + res.b, cfg.sigma);
    require_finite(v, "the v-update");
    res.b += u - v;

    TraceRecord rec;
    rec.iter = k + 1;
    rec.rel_change = relative_change(u, res.u);
    rec.delta_u = norm(u - res.u);
    rec.delta_v = norm(v - res.v);
    // u alone can stall for a step (u1 = u0 when the fidelity is inactive).
    const double v_change = relative_change(v, res.v);
    res.u = std::move(u);
    res.v = std::move(v);
    rec.fidelity = fidelity_value(g, res.u);
    if (reference) rec.psnr = psnr(res.u, *reference);
    if (potential) {
      rec.lyapunov = lyapunov_value(res.u, res.v, res.b, *potential, g, beta);
    }
    rec.millis = millis_since(start);
    res.trace.records.push_back(rec);
    if (rec.rel_change < cfg.stop_tol && v_change < cfg.stop_tol) {
      res.trace.converged = true;
      break;
    }
  }
  return res;
}

PegdResult coco_pegd(const PoissonFidelity& g, const Denoiser& d,
                     const SolverConfig& cfg,
                     const std::optional<Image>& reference) {
  check_common(g, d, cfg, 1.0);
  const double beta = cfg.beta();
  const double step_beta = cfg.beta_override.value_or(beta);
  if (cfg.enforce_theory) {
    const double r = weak_convexity_modulus(cfg.gamma, cfg.t, beta) / beta;
    const double bound = pegd_step_bound(r);
    if (!(1.0 / step_beta < bound)) {
      throw ConfigError("step 1/beta = " + std::to_string(1.0 / step_beta) +
                        " is not below the bound " + std::to_string(bound));
    }
  }
  const auto potential = d.explicit_potential(cfg.t, beta, cfg.sigma);
  const double envelope_weight = beta / step_beta;
  const auto objective = [&](const Image& u) {
    return potential->value(u) +
           envelope_weight * moreau_envelope(u, g, cfg.inner);
  };

  const auto start = Clock::now();
  PegdResult res;
  res.u = initial_estimate(g);
  if (reference) require_same_shape(*reference, res.u, "reference");
  if (potential) res.trace.initial_lyapunov = objective(res.u);

  for (int k = 0; k < cfg.max_iter; ++k) {
    const Image grad = moreau_grad(res.u, g, cfg.inner);
    Image u = averaged_apply(d, cfg.t, res.u - (1.0 / step_beta) * grad,
                             cfg.sigma);
    require_finite(u, "the PEGD update");

    TraceRecord rec;
    rec.iter = k + 1;
    rec.rel_change = relative_change(u, res.u);
    rec.delta_u = norm(u - res.u);
    res.u = std::move(u);
    rec.fidelity = fidelity_value(g, res.u);
    if (reference) rec.psnr = psnr(res.u, *reference);
    if (potential) rec.lyapunov = objective(res.u);
    rec.millis = millis_since(start);
    res.trace.records.push_back(rec);
    if (rec.rel_change < cfg.stop_tol) {
      res.trace.converged = true;
      break;
    }
  }
  return res;
}

void write_trace_csv(std::ostream& out, const SolverTrace& trace) {
  const auto field = [&out](double x) {
    if (!std::isnan(x)) out << x;
  };
  const auto old_precision = out.precision(12);
  out << "iter,rel_change,psnr,fidelity,lyapunov,millis\n";
  for (const TraceRecord& r : trace.records) {
    out << r.iter << ',';
    field(r.rel_change);
    out << ',';
    field(r.psnr);
    out << ',';
    field(r.fidelity);
    out << ',';
    field(r.lyapunov);
    out << ',';
    field(r.millis);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace cocopnp
