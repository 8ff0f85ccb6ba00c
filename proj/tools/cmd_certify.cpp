#include <fstream>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "cocopnp/rng.hpp"
#include "cocopnp/spectral.hpp"
#include "cocopnp/training.hpp"

namespace cocopnp::cli {

namespace {

struct CertifyOptions {
  std::string denoiser = "dct";
  double dct_scale = 1.0;
  std::string patch;
  int points = 16;
  std::optional<double> gamma;
  int iterations = kCertificationPowerIterations;
  double sigma_min = 0.0;
  double sigma_max = 50.0 / 255.0;
  std::string dataset;
  std::uint64_t seed = 0;
  std::string out;
};

void run_certify(const CertifyOptions& o, const CLI::App& sub) {
  if (o.points < 1) throw ConfigError("points must be at least 1");
  if (o.iterations < 1) throw ConfigError("iterations must be at least 1");
  const DenoiserChoice choice = make_denoiser(o.denoiser, o.dct_scale);

  TrainingConfig cfg;
  if (choice.patch) {
    cfg.patch = *choice.patch;
    if (!o.patch.empty() && !(parse_shape(o.patch) == cfg.patch)) {
      throw ConfigError("--patch " + o.patch + " disagrees with the checkpoint's " +
                        to_string(cfg.patch));
    }
  } else {
    cfg.patch = parse_shape(o.patch.empty() ? "8x8" : o.patch);
  }
  cfg.sigma_min = o.sigma_min;
  cfg.sigma_max = o.sigma_max;
  if (!o.dataset.empty()) {
    require_exists(o.dataset, "dataset directory");
    cfg.dataset_dir = o.dataset;
  }
  cfg.validate();
  const double gamma = o.gamma.value_or(choice.denoiser->claimed_gamma().value_or(0.5));

  const std::uint64_t point_seed = derive_seed(o.seed, kCertifyPointStream);
  const std::uint64_t power_seed = derive_seed(o.seed, kCertifyPowerStream);
  Xoshiro256 rng(point_seed);
  const auto samples = draw_batch(cfg.make_dataset(), cfg, o.points, rng);
  const CertificationSummary s =
      certify_denoiser(*choice.denoiser, samples, gamma, o.iterations, power_seed);

  const auto dir = prepare_output_dir(o.out);
  {
    std::ofstream csv(dir / "certification.csv");
    if (!csv) throw IoError("cannot write certification.csv");
    write_certification_csv(csv, s);
  }
  write_replay_config(dir / "certify.ini", sub);
  write_json(dir / "certification.json",
             Json{{"command", "certify"},
                  {"version", version()},
                  {"denoiser", choice.denoiser->name()},
                  {"gamma", gamma},
                  {"patch", to_string(cfg.patch)},
                  {"points", o.points},
                  {"iterations", o.iterations},
                  {"sigma_min", cfg.sigma_min},
                  {"sigma_max", cfg.sigma_max},
                  {"dataset", o.dataset.empty() ? Json("synthetic") : Json(o.dataset)},
                  {"seed", o.seed},
                  {"point_seed", point_seed},
                  {"power_seed", power_seed},
                  {"mean_symmetry", s.mean_symmetry},
                  {"max_coco", s.max_coco},
                  {"coco_pass_fraction", s.coco_pass_fraction}});
  std::cout << "mean_symmetry      " << s.mean_symmetry << '\n'
            << "max_coco           " << s.max_coco << '\n'
            << "coco_pass_fraction " << s.coco_pass_fraction << '\n';
}

}  // namespace

Action add_certify(CLI::App& app) {
  auto o = std::make_shared<CertifyOptions>();
  CLI::App* sub = app.add_subcommand(
      "certify", "Estimate cocoercivity and symmetry norms at sampled patches");
  sub->add_option("--denoiser", o->denoiser,
                  "Built-in 'dct' or a CPNPDEN1 checkpoint path")
      ->capture_default_str();
  sub->add_option("--dct-scale", o->dct_scale,
                  "DCT threshold as a multiple of sigma")->capture_default_str();
  sub->add_option("--patch", o->patch,
                  "Patch shape HxW[xC] (default 8x8, or the checkpoint's)");
  sub->add_option("--points", o->points, "Number of sampled patches")
      ->capture_default_str();
  sub->add_option("--gamma", o->gamma,
                  "Modulus to certify (default: the denoiser's claim, else 0.5)");
  sub->add_option("--iterations", o->iterations, "Power iterations per norm")
      ->capture_default_str();
  sub->add_option("--sigma-min", o->sigma_min)->capture_default_str();
  sub->add_option("--sigma-max", o->sigma_max)->capture_default_str();
  sub->add_option("--dataset", o->dataset,
                  "Directory of PNGs to sample patches from (default synthetic)");
  sub->add_option("--seed", o->seed, "Root seed")->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  return [o, sub] { run_certify(*o, *sub); };
}

}  // namespace cocopnp::cli
