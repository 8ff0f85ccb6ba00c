#include <memory>

#include "commands.hpp"
#include "cocopnp/image_io.hpp"
#include "cocopnp/noise.hpp"
#include "cocopnp/rng.hpp"

namespace cocopnp::cli {

namespace {

struct SimulateOptions {
  std::string input;
  std::string kernel;
  double peak = 100.0;
  std::uint64_t seed = 0;
  std::string out;
};

void run_simulate(const SimulateOptions& o, const CLI::App& sub) {
  require_exists(o.input, "input image");
  if (!(o.peak > 0.0)) throw ConfigError("peak must be positive");
  const Image clean = read_image(o.input);

  Json manifest;
  manifest["command"] = "simulate";
  manifest["version"] = version();
  manifest["input"] = o.input;
  manifest["shape"] = {clean.height(), clean.width(), clean.channels()};
  LinearOperator op = LinearOperator::identity();
  if (o.kernel.empty()) {
    manifest["kernel"] = nullptr;
    manifest["kernel_hash"] = nullptr;
  } else {
    const LoadedKernel k = load_kernel(o.kernel);
    manifest["kernel"] = o.kernel;
    manifest["kernel_hash"] = kernel_hash(k.kernel);
    manifest["kernel_renormalized"] = k.renormalized;
    op = LinearOperator::convolution(k.kernel);
  }
  manifest["operator"] = op.describe();
  manifest["peak"] = o.peak;
  manifest["seed"] = o.seed;
  const std::uint64_t noise_seed = derive_seed(o.seed, kNoiseStream);
  manifest["noise_seed"] = noise_seed;

  const Image observed = simulate_poisson(clean, {o.peak, noise_seed}, op);
  const auto dir = prepare_output_dir(o.out);
  write_png(dir / "observation.png", observed);
  write_dump(dir / "observation.dump", observed);
  write_replay_config(dir / "simulate.ini", sub);
  manifest["outputs"] = {{"png", "observation.png"},
                         {"dump", "observation.dump"},
                         {"config", "simulate.ini"}};
  write_json(dir / "manifest.json", manifest);
}

}  // namespace

Action add_simulate(CLI::App& app) {
  auto o = std::make_shared<SimulateOptions>();
  CLI::App* sub = app.add_subcommand(
      "simulate", "Blur a clean image and corrupt it with Poisson noise");
  sub->add_option("--input", o->input, "Clean image (PNG or dump)")->required();
  sub->add_option("--kernel", o->kernel,
                  "Blur kernel (grayscale PNG or text matrix); identity if absent");
  sub->add_option("--peak", o->peak, "Peak photon count p")->capture_default_str();
  sub->add_option("--seed", o->seed, "Root seed")->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  return [o, sub] { run_simulate(*o, *sub); };
}

}  // namespace cocopnp::cli
