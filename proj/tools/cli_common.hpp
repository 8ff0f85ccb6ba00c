#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cocopnp/denoiser.hpp"
#include "cocopnp/errors.hpp"
#include "cocopnp/image.hpp"
#include "cocopnp/linear_operator.hpp"
#include "json.hpp"

namespace cocopnp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

// Streams split off the root --seed. Every command uses derive_seed(seed, s).
inline constexpr std::uint64_t kNoiseStream = 1;
inline constexpr std::uint64_t kCertifyPointStream = 2;
inline constexpr std::uint64_t kCertifyPowerStream = 3;

using Json = nlohmann::ordered_json;

/// A subcommand's action, run after parsing succeeds.
using Action = std::function<void()>;

/// 64-bit FNV-1a over the kernel dimensions (uint32 LE) and values (f64 LE).
std::string kernel_hash(const Image& kernel);

struct LoadedKernel {
  Image kernel;
  double original_sum = 1.0;
  bool renormalized = false;
};

/// Reads a grayscale PNG or whitespace text matrix and rescales it to sum 1,
/// warning on stderr when the correction exceeds 1e-6.
LoadedKernel load_kernel(const std::filesystem::path& path);

/// Fails with ConfigError naming the path unless it exists.
void require_exists(const std::filesystem::path& path, const char* what);

struct DenoiserChoice {
  std::shared_ptr<const Denoiser> denoiser;
  /// Set for checkpoints, which act on patches of this shape.
  std::optional<Shape> patch;

  /// The denoiser for whole images: checkpoints are tiled.
  std::shared_ptr<const Denoiser> for_images() const;
};

/// "dct" (soft thresholding at dct_scale * sigma) or a CPNPDEN1 path.
DenoiserChoice make_denoiser(const std::string& spec, double dct_scale);

/// Parses "HxW" or "HxWxC".
Shape parse_shape(const std::string& text);

void write_json(const std::filesystem::path& path, const Json& value);

/// Creates the directory (and parents) if needed.
std::filesystem::path prepare_output_dir(const std::filesystem::path& dir);

/// The parsed options of `sub` as an INI fragment that --config accepts.
void write_replay_config(const std::filesystem::path& path,
                         const CLI::App& sub);

std::string version();

}  // namespace cocopnp::cli
