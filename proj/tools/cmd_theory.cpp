#include <cmath>
#include <iomanip>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "cocopnp/step_theory.hpp"

namespace cocopnp::cli {

namespace {

struct TheoryOptions {
  double gamma = 0.5;
  double t = 0.2;
  std::optional<double> beta;
  std::optional<double> sigma;
  bool json = false;
};

Json report_json(const ModulusReport& m) {
  const auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  return Json{{"gamma", m.gamma},
              {"t", m.t},
              {"beta", m.beta},
              {"r", m.r},
              {"L", m.L},
              {"case", m.case_index},
              {"t0", num(m.t0)},
              {"admm_margin", m.admm_margin},
              {"pegd_step_bound", m.pegd_step_bound}};
}

void print_text(const ModulusReport& m) {
  const auto row = [](const char* key, const std::string& value) {
    std::cout << std::left << std::setw(18) << key << value << '\n';
  };
  const auto num = [](double x) {
    if (!std::isfinite(x)) return std::string("n/a");
    std::ostringstream s;
    s << std::setprecision(10) << x;
    return s.str();
  };
  row("gamma", num(m.gamma));
  row("t", num(m.t));
  row("beta", num(m.beta));
  row("r", num(m.r));
  row("L", num(m.L));
  row("case", std::to_string(m.case_index));
  row("t0", num(m.t0));
  row("admm_margin", num(m.admm_margin));
  row("admm_descent", m.admm_descent ? "yes" : "no");
  row("pegd_step_bound", num(m.pegd_step_bound));
  row("pegd_step_ok", m.pegd_step_ok ? "yes" : "no");
}

void run_theory(const TheoryOptions& o) {
  TheoryParams p{o.gamma, o.t, 1.0};
  if (o.sigma) {
    p = TheoryParams::from_sigma(o.gamma, o.t, *o.sigma);
  } else if (o.beta) {
    p.beta = *o.beta;
  }
  const ModulusReport m = moduli(p);
  if (o.json) {
    std::cout << report_json(m).dump(2) << '\n';
  } else {
    print_text(m);
  }
}

}  // namespace

Action add_theory(CLI::App& app) {
  auto o = std::make_shared<TheoryOptions>();
  CLI::App* sub = app.add_subcommand(
      "theory", "Print weak-convexity moduli, t0 and step bounds");
  sub->add_option("--gamma", o->gamma, "Cocoercivity modulus in (0,1]")
      ->capture_default_str();
  sub->add_option("--t", o->t, "Relaxation parameter in [0,1)")
      ->capture_default_str();
  auto* beta = sub->add_option("--beta", o->beta, "Prox scaling beta (default 1)");
  sub->add_option("--sigma", o->sigma, "Denoiser strength; sets beta = 1/sigma^2")
      ->excludes(beta);
  sub->add_flag("--json", o->json, "Print JSON instead of aligned text");
  return [o] { run_theory(*o); };
}

}  // namespace cocopnp::cli
