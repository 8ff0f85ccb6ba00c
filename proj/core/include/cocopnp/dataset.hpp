#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cocopnp/image.hpp"
#include "cocopnp/rng.hpp"

namespace cocopnp {

/// Source of clean training patches.
class PatchDataset {
 public:
  /// Seeded synthetic patches: half piecewise-constant (rectangles and
  /// half-plane edges), half smooth affine gradients, all within [0,1].
  static PatchDataset synthetic(Shape patch);

  /// Every PNG in `dir` (non-recursive, sorted by name). Patches are cut at
  /// uniformly random positions of uniformly chosen images; RGB sources are
  /// averaged to gray when the patch has one channel. Throws IoError when the
  /// directory holds no usable image.
  static PatchDataset from_directory(const std::filesystem::path& dir,
                                     Shape patch);

  const Shape& patch_shape() const { return patch_; }
  bool is_synthetic() const { return images_.empty(); }
  std::size_t image_count() const { return images_.size(); }

  Image sample(Xoshiro256& rng) const;

 private:
  explicit PatchDataset(Shape patch) : patch_(patch) {}

  Image synthetic_patch(Xoshiro256& rng) const;

  Shape patch_;
  std::vector<Image> images_;
};

}  // namespace cocopnp
