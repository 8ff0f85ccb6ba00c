#pragma once

#include <memory>

#include "cocopnp/denoiser.hpp"

namespace cocopnp {

/// Applies a patch denoiser independently to non-overlapping tiles. The
/// result is block diagonal, so cocoercivity, conservativeness and any
/// explicit potential (summed over tiles) carry over unchanged.
class TiledDenoiser final : public Denoiser {
 public:
  TiledDenoiser(std::shared_ptr<const Denoiser> patch_denoiser, Shape patch);

  Image apply(const Image& x, double sigma) const override;
  Image jvp(const Image& x, const Image& v, double sigma) const override;
  Image vjp(const Image& x, const Image& v, double sigma) const override;
  std::optional<double> claimed_gamma() const override {
    return inner_->claimed_gamma();
  }
  std::unique_ptr<Potential> explicit_potential(double t, double beta,
                                                double sigma) const override;
  std::string name() const override { return "tiled(" + inner_->name() + ")"; }

  const Shape& patch() const { return patch_; }

 private:
  template <class Fn>
  Image map_tiles(const Image& x, Fn&& fn) const;

  std::shared_ptr<const Denoiser> inner_;
  Shape patch_;
};

}  // namespace cocopnp
