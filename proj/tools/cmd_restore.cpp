#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "commands.hpp"
#include "cocopnp/image_io.hpp"
#include "cocopnp/noise.hpp"
#include "cocopnp/poisson_fidelity.hpp"
#include "cocopnp/solvers.hpp"
#include "cocopnp/step_theory.hpp"

namespace cocopnp::cli {

namespace {

struct RestoreOptions {
  std::string observation;
  std::string reference;
  std::string task = "denoise";
  std::string kernel;
  std::string solver = "coco-admm";
  std::string denoiser = "dct";
  double dct_scale = 1.0;
  double lambda = 1.0;
  double sigma = 0.1;
  std::optional<double> gamma;
  double t = 0.2;
  std::optional<double> beta;
  int max_iter = 200;
  double stop_tol = 1e-6;
  double inner_rho = 1.0;
  int inner_iterations = 10;
  bool enforce_theory = false;
  std::string out;
};

/// Inputs shared by every run of a restore or sweep invocation.
struct Problem {
  Image observation;
  std::optional<Image> reference;
  LinearOperator op = LinearOperator::identity();
  std::optional<std::string> kernel_hash;
  DenoiserChoice denoiser;
};

Problem load_problem(const RestoreOptions& o) {
  if (o.task != "denoise" && o.task != "deconvolve") {
    throw ConfigError("task must be denoise or deconvolve, got " + o.task);
  }
  if (o.solver != "coco-admm" && o.solver != "coco-pegd") {
    throw ConfigError("solver must be coco-admm or coco-pegd, got " + o.solver);
  }
  require_exists(o.observation, "observation");
  Problem p;
  p.observation = read_image(o.observation);
  if (!o.reference.empty()) {
    require_exists(o.reference, "reference image");
    p.reference = read_image(o.reference);
  }
  if (o.task == "deconvolve") {
    if (o.kernel.empty()) throw ConfigError("deconvolve needs --kernel");
    const LoadedKernel k = load_kernel(o.kernel);
    p.op = LinearOperator::convolution(k.kernel);
    p.kernel_hash = kernel_hash(k.kernel);
  } else if (!o.kernel.empty()) {
    throw ConfigError("the denoise task takes no --kernel");
  }
  p.denoiser = make_denoiser(o.denoiser, o.dct_scale);
  return p;
}

Json nullable(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json theory_block(double gamma, double t, double beta, double step_beta) {
  Json j;
  if (!(gamma > 0.0 && gamma <= 1.0)) return nullptr;
  const double r = weak_convexity_modulus(gamma, t, beta);
  j["r"] = r;
  if (t < 1.0) {
    const ModulusReport m = moduli({gamma, t, beta});
    j["L"] = m.L;
    j["case"] = m.case_index;
    j["t0"] = nullable(m.t0);
    j["admm_margin"] = m.admm_margin;
    j["admm_descent"] = m.admm_descent;
  }
  j["pegd_step_bound"] = pegd_step_bound(r / beta);
  j["pegd_step_inverse"] = 1.0 / step_beta;
  j["pegd_step_ok"] = 1.0 / step_beta < pegd_step_bound(r / beta);
  return j;
}

/// Solves one configuration and writes its files into `dir`.
Json run_restore(const RestoreOptions& o, const Problem& p,
                 const std::filesystem::path& dir) {
  const auto denoiser = p.denoiser.for_images();
  SolverConfig cfg;
  cfg.sigma = o.sigma;
  cfg.gamma = o.gamma.value_or(denoiser->claimed_gamma().value_or(0.5));
  cfg.t = o.t;
  cfg.max_iter = o.max_iter;
  cfg.stop_tol = o.stop_tol;
  cfg.inner.rho = o.inner_rho;
  cfg.inner.T = o.inner_iterations;
  cfg.enforce_theory = o.enforce_theory;
  cfg.beta_override = o.beta;
  const PoissonFidelity g{p.observation, p.op, o.lambda};

  const auto start = std::chrono::steady_clock::now();
  Image restored;
  SolverTrace trace;
  if (o.solver == "coco-admm") {
    AdmmResult res = coco_admm(g, *denoiser, cfg, p.reference);
    restored = std::move(res.u);
    trace = std::move(res.trace);
  } else {
    PegdResult res = coco_pegd(g, *denoiser, cfg, p.reference);
    restored = std::move(res.u);
    trace = std::move(res.trace);
  }
  const double elapsed = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();

  write_png(dir / "restored.png", restored);
  write_dump(dir / "restored.dump", restored);
  {
    std::ofstream csv(dir / "trace.csv");
    if (!csv) throw IoError("cannot write " + (dir / "trace.csv").string());
    write_trace_csv(csv, trace);
  }

  Json s;
  s["command"] = "restore";
  s["version"] = version();
  s["observation"] = o.observation;
  s["reference"] = o.reference.empty() ? Json(nullptr) : Json(o.reference);
  s["task"] = o.task;
  s["solver"] = o.solver;
  s["denoiser"] = denoiser->name();
  s["operator"] = p.op.describe();
  s["kernel_hash"] = p.kernel_hash ? Json(*p.kernel_hash) : Json(nullptr);
  s["parameters"] = {{"lambda", o.lambda},
                     {"sigma", cfg.sigma},
                     {"gamma", cfg.gamma},
                     {"t", cfg.t},
                     {"beta", cfg.beta()},
                     {"beta_override", o.beta ? Json(*o.beta) : Json(nullptr)},
                     {"max_iter", cfg.max_iter},
                     {"stop_tol", cfg.stop_tol},
                     {"inner_rho", cfg.inner.rho},
                     {"inner_iterations", cfg.inner.T},
                     {"enforce_theory", cfg.enforce_theory}};
  s["theory"] = theory_block(cfg.gamma, cfg.t, cfg.beta(),
                             cfg.beta_override.value_or(cfg.beta()));
  s["iterations"] = trace.iterations();
  s["converged"] = trace.converged;
  s["final_rel_change"] =
      trace.records.empty() ? Json(nullptr) : nullable(trace.records.back().rel_change);
  if (p.reference) {
    s["psnr"] = psnr(restored, *p.reference);
    s["observation_psnr"] = p.observation.shape() == p.reference->shape()
                                ? Json(psnr(p.observation, *p.reference))
                                : Json(nullptr);
  } else {
    s["psnr"] = nullptr;
    s["observation_psnr"] = nullptr;
  }
  s["elapsed_ms"] = elapsed;
  s["outputs"] = {{"png", "restored.png"},
                  {"dump", "restored.dump"},
                  {"trace", "trace.csv"}};
  write_json(dir / "summary.json", s);
  return s;
}

void add_restore_options(CLI::App* sub, RestoreOptions& o) {
  sub->add_option("--observation", o.observation,
                  "Observed image (PNG or dump)")->required();
  sub->add_option("--reference", o.reference,
                  "Clean image; enables PSNR in the trace and summary");
  sub->add_option("--task", o.task, "denoise or deconvolve")
      ->check(CLI::IsMember({"denoise", "deconvolve"}))
      ->capture_default_str();
  sub->add_option("--kernel", o.kernel,
                  "Blur kernel for deconvolve (grayscale PNG or text matrix)");
  sub->add_option("--solver", o.solver, "coco-admm or coco-pegd")
      ->check(CLI::IsMember({"coco-admm", "coco-pegd"}))
      ->capture_default_str();
  sub->add_option("--denoiser", o.denoiser,
                  "Built-in 'dct' or a CPNPDEN1 checkpoint path")
      ->capture_default_str();
  sub->add_option("--dct-scale", o.dct_scale,
                  "DCT threshold as a multiple of sigma")->capture_default_str();
  sub->add_option("--lambda", o.lambda, "Fidelity weight")->capture_default_str();
  sub->add_option("--sigma", o.sigma, "Denoiser strength; beta = 1/sigma^2")
      ->capture_default_str();
  sub->add_option("--gamma", o.gamma,
                  "Cocoercivity modulus (default: the denoiser's claim, else 0.5)");
  sub->add_option("--t", o.t, "Relaxation parameter")->capture_default_str();
  sub->add_option("--beta", o.beta, "PEGD step parameter override");
  sub->add_option("--max-iter", o.max_iter)->capture_default_str();
  sub->add_option("--stop-tol", o.stop_tol,
                  "Relative-change stopping threshold")->capture_default_str();
  sub->add_option("--inner-rho", o.inner_rho,
                  "Inner ADMM penalty for the Poisson prox")->capture_default_str();
  sub->add_option("--inner-iterations", o.inner_iterations,
                  "Inner ADMM iterations T")->capture_default_str();
  sub->add_flag("--enforce-theory", o.enforce_theory,
                "Reject parameters outside the convergence guarantees");
  sub->add_option("--out", o.out, "Output directory")->required();
}

void run_restore_command(const RestoreOptions& o, const CLI::App& sub) {
  const Problem p = load_problem(o);
  const auto dir = prepare_output_dir(o.out);
  write_replay_config(dir / "restore.ini", sub);
  run_restore(o, p, dir);
}

struct SweepOptions {
  RestoreOptions base;
  std::vector<double> gammas;
  std::vector<double> ts;
  std::vector<double> sigmas;
  std::vector<double> lambdas;
  unsigned workers = 0;
};

struct SweepRow {
  RestoreOptions options;
  std::string status = "ok";
  int severity = kExitOk;
  Json summary;
};

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void run_sweep(const SweepOptions& o, const CLI::App& sub) {
  const Problem p = load_problem(o.base);
  const auto dir = prepare_output_dir(o.base.out);
  write_replay_config(dir / "sweep.ini", sub);

  const auto axis = [](const std::vector<double>& values, double fallback) {
    return values.empty() ? std::vector<double>{fallback} : values;
  };
  std::vector<SweepRow> rows;
  const double gamma0 = o.base.gamma.value_or(std::nan(""));
  for (double gamma : axis(o.gammas, gamma0))
    for (double t : axis(o.ts, o.base.t))
      for (double sigma : axis(o.sigmas, o.base.sigma))
        for (double lambda : axis(o.lambdas, o.base.lambda)) {
          SweepRow row;
          row.options = o.base;
          if (!std::isnan(gamma)) row.options.gamma = gamma;
          row.options.t = t;
          row.options.sigma = sigma;
          row.options.lambda = lambda;
          rows.push_back(std::move(row));
        }

  // Runs are independent; each worker claims the next index.
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      std::ostringstream name;
      name << "run_" << std::setw(4) << std::setfill('0') << i;
      try {
        const auto run_dir = prepare_output_dir(dir / name.str());
        row.summary = run_restore(row.options, p, run_dir);
      } catch (const NumericalError& e) {
        row.status = std::string("numerical: ") + e.what();
        row.severity = kExitNumerical;
      } catch (const Error& e) {
        row.status = std::string("validation: ") + e.what();
        row.severity = kExitValidation;
      }
    }
  };
  unsigned count = o.workers ? o.workers : std::thread::hardware_concurrency();
  count = std::max(1u, std::min<unsigned>(count, static_cast<unsigned>(rows.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < count; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw IoError("cannot write " + (dir / "sweep.csv").string());
  csv << std::setprecision(12);
  csv << "run_id,gamma,t,sigma,lambda,status,iterations,converged,psnr\n";
  int worst = kExitOk;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& row = rows[i];
    worst = std::max(worst, row.severity);
    csv << i << ',';
    if (row.summary.is_object()) {
      csv << row.summary["parameters"]["gamma"].get<double>();
    } else if (row.options.gamma) {
      csv << *row.options.gamma;
    }
    csv << ',' << row.options.t << ',' << row.options.sigma << ','
        << row.options.lambda << ',' << csv_quote(row.status) << ',';
    if (row.summary.is_object()) {
      csv << row.summary["iterations"].get<int>() << ','
          << (row.summary["converged"].get<bool>() ? 1 : 0) << ',';
      if (!row.summary["psnr"].is_null()) csv << row.summary["psnr"].get<double>();
    } else {
      csv << ",,";
    }
    csv << '\n';
  }
  csv.close();
  if (worst == kExitNumerical) {
    throw NumericalError("some sweep runs failed numerically; see sweep.csv");
  }
  if (worst == kExitValidation) {
    throw ConfigError("some sweep runs were rejected; see sweep.csv");
  }
}

}  // namespace

Action add_restore(CLI::App& app) {
  auto o = std::make_shared<RestoreOptions>();
  CLI::App* sub = app.add_subcommand(
      "restore", "Restore an observation with CoCo-ADMM or CoCo-PEGD");
  add_restore_options(sub, *o);
  return [o, sub] { run_restore_command(*o, *sub); };
}

Action add_sweep(CLI::App& app) {
  auto o = std::make_shared<SweepOptions>();
  CLI::App* sub = app.add_subcommand(
      "sweep", "Run restore over a parameter grid on a worker pool");
  add_restore_options(sub, o->base);
  sub->add_option("--gammas", o->gammas, "Comma-separated gamma values")
      ->delimiter(',');
  sub->add_option("--ts", o->ts, "Comma-separated t values")->delimiter(',');
  sub->add_option("--sigmas", o->sigmas, "Comma-separated sigma values")
      ->delimiter(',');
  sub->add_option("--lambdas", o->lambdas, "Comma-separated lambda values")
      ->delimiter(',');
  sub->add_option("--workers", o->workers,
                  "Worker threads (0: hardware concurrency)")->capture_default_str();
  return [o, sub] { run_sweep(*o, *sub); };
}

}  // namespace cocopnp::cli
