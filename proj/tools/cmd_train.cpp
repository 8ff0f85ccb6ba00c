#include <fstream>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "cocopnp/denoiser_io.hpp"
#include "cocopnp/training.hpp"

namespace cocopnp::cli {

namespace {

struct TrainOptions {
  TrainingConfig cfg;
  std::string family = "linear";
  std::string patch = "4x4";
  std::string dataset;
  std::string penalty_gradient = "fd";
  int hidden = 16;
  std::string out;
};

void write_log(const std::filesystem::path& path,
               const std::vector<LossRecord>& log) {
  std::ofstream csv(path);
  if (!csv) throw IoError("cannot write " + path.string());
  write_loss_csv(csv, log);
}

template <typename D>
void write_result(const std::filesystem::path& dir, const TrainOptions& o,
                  const TrainingResult<D>& res) {
  save_denoiser(dir / "denoiser.cpnpden", res.denoiser);
  write_log(dir / "loss.csv", res.log);
  {
    std::ofstream csv(dir / "certification.csv");
    if (!csv) throw IoError("cannot write certification.csv");
    write_certification_csv(csv, res.certification);
  }
  const LossBreakdown& last = res.log.back().loss;
  write_json(dir / "train.json",
             Json{{"command", "train"},
                  {"version", version()},
                  {"family", o.family},
                  {"patch", to_string(o.cfg.patch)},
                  {"steps", o.cfg.steps},
                  {"seed", o.cfg.seed},
                  {"gamma", o.cfg.gamma},
                  {"alpha1", o.cfg.alpha1},
                  {"alpha2", o.cfg.alpha2},
                  {"epsilon", o.cfg.epsilon},
                  {"final_loss",
                   {{"data_l1", last.data_l1},
                    {"hamiltonian", last.hamiltonian},
                    {"spectral", last.spectral},
                    {"total", last.total}}},
                  {"certification",
                   {{"mean_symmetry", res.certification.mean_symmetry},
                    {"max_coco", res.certification.max_coco},
                    {"coco_pass_fraction", res.certification.coco_pass_fraction}}},
                  {"outputs",
                   {{"checkpoint", "denoiser.cpnpden"},
                    {"loss", "loss.csv"},
                    {"certification", "certification.csv"}}}});
  std::cout << "final total loss   " << last.total << '\n'
            << "mean_symmetry      " << res.certification.mean_symmetry << '\n'
            << "max_coco           " << res.certification.max_coco << '\n';
}

void run_train(TrainOptions o, const CLI::App& sub) {
  o.cfg.patch = parse_shape(o.patch);
  o.cfg.hidden = o.hidden;
  if (!o.dataset.empty()) {
    require_exists(o.dataset, "dataset directory");
    o.cfg.dataset_dir = o.dataset;
  }
  o.cfg.penalty_gradient = o.penalty_gradient == "spsa"
                               ? PenaltyGradient::spsa
                               : PenaltyGradient::finite_difference;
  o.cfg.validate();
  const auto dir = prepare_output_dir(o.out);
  write_replay_config(dir / "train.ini", sub);
  try {
    if (o.family == "linear") {
      write_result(dir, o, train_linear(o.cfg));
    } else {
      write_result(dir, o, train_small_net(o.cfg));
    }
  } catch (const TrainingDivergence& e) {
    write_log(dir / "loss.csv", e.log());
    throw;
  }
}

}  // namespace

Action add_train(CLI::App& app) {
  auto o = std::make_shared<TrainOptions>();
  TrainingConfig& c = o->cfg;
  CLI::App* sub = app.add_subcommand(
      "train", "Train a linear or small-net denoiser under the CoCo loss");
  sub->add_option("--family", o->family, "linear or small-net")
      ->check(CLI::IsMember({"linear", "small-net"}))
      ->capture_default_str();
  sub->add_option("--patch", o->patch, "Patch shape HxW[xC]")->capture_default_str();
  sub->add_option("--hidden", o->hidden, "Small-net hidden width")->capture_default_str();
  sub->add_option("--alpha1", c.alpha1, "Hamiltonian penalty weight")->capture_default_str();
  sub->add_option("--alpha2", c.alpha2, "Spectral penalty weight")->capture_default_str();
  sub->add_option("--epsilon", c.epsilon, "Hinge floor is 1 - epsilon")->capture_default_str();
  sub->add_option("--gamma", c.gamma, "Target cocoercivity modulus")->capture_default_str();
  sub->add_option("--sigma-min", c.sigma_min)->capture_default_str();
  sub->add_option("--sigma-max", c.sigma_max)->capture_default_str();
  sub->add_option("--power-iters", c.power_iters,
                  "Power iterations per penalty evaluation")->capture_default_str();
  sub->add_option("--batch-size", c.batch_size)->capture_default_str();
  sub->add_option("--steps", c.steps)->capture_default_str();
  sub->add_option("--lr", c.learning_rate,
                  "Learning rate (default 1e-3 linear, 1e-4 small-net)");
  sub->add_option("--seed", c.seed, "Root seed")->capture_default_str();
  sub->add_option("--dataset", o->dataset,
                  "Directory of PNGs (default: synthetic patches)");
  sub->add_option("--penalty-gradient", o->penalty_gradient,
                  "Small-net penalty gradient: fd or spsa")
      ->check(CLI::IsMember({"fd", "spsa"}))
      ->capture_default_str();
  sub->add_option("--fd-step", c.fd_step)->capture_default_str();
  sub->add_option("--init-scale", c.init_scale,
                  "Linear init: I + init_scale * N(0, 1/n)")->capture_default_str();
  sub->add_option("--divergence-window", c.divergence_window,
                  "Consecutive loss rises that count as divergence")
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  return [o, sub] { run_train(*o, *sub); };
}

}  // namespace cocopnp::cli
