#pragma once

#include <filesystem>
#include <memory>
#include <variant>

#include "cocopnp/linear_denoiser.hpp"
#include "cocopnp/small_net_denoiser.hpp"

namespace cocopnp {

/// Checkpoint layout (all little-endian):
///
///   offset  size  field
///   0       8     magic "CPNPDEN1"
///   8       4     kind (uint32): 1 = linear, 2 = small-net
///   12      12    patch height, width, channels (uint32 each)
///   24      4     hidden width (uint32, 0 for linear)
///   28      8     claimed gamma (float64, NaN when absent)
///   36      ...   float64 payload
///
/// Linear payload: W row-major (n*n) followed by b (n). Small-net payload:
/// the parameter vector in SmallNetDenoiser's documented layout.
using ParametricDenoiser = std::variant<LinearDenoiser, SmallNetDenoiser>;

void save_denoiser(const std::filesystem::path& path,
                   const LinearDenoiser& d);
void save_denoiser(const std::filesystem::path& path,
                   const SmallNetDenoiser& d);

ParametricDenoiser load_denoiser(const std::filesystem::path& path);

/// Loaded checkpoint as a shared Denoiser.
std::shared_ptr<const Denoiser> load_denoiser_shared(
    const std::filesystem::path& path);

/// Patch shape recorded in a parametric denoiser.
Shape patch_shape(const ParametricDenoiser& d);

}  // namespace cocopnp
