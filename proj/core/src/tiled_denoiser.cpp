#include "cocopnp/tiled_denoiser.hpp"

#include <utility>
#include <vector>

#include "cocopnp/errors.hpp"

namespace cocopnp {

namespace {

Image extract(const Image& x, const Shape& patch, std::uint32_t r0,
              std::uint32_t c0) {
  Image tile(patch);
  for (std::uint32_t i = 0; i < patch.height; ++i)
    for (std::uint32_t j = 0; j < patch.width; ++j)
      for (std::uint32_t c = 0; c < patch.channels; ++c)
        tile.at(i, j, c) = x.at(r0 + i, c0 + j, c);
  return tile;
}

void insert(Image& x, const Image& tile, std::uint32_t r0, std::uint32_t c0) {
  for (std::uint32_t i = 0; i < tile.height(); ++i)
    for (std::uint32_t j = 0; j < tile.width(); ++j)
      for (std::uint32_t c = 0; c < tile.channels(); ++c)
        x.at(r0 + i, c0 + j, c) = tile.at(i, j, c);
}

class TiledPotential final : public Potential {
 public:
  TiledPotential(std::unique_ptr<Potential> inner, Shape patch)
      : inner_(std::move(inner)), patch_(patch) {}

  double value(const Image& u) const override {
    double sum = 0.0;
    for (std::uint32_t r = 0; r < u.height(); r += patch_.height)
      for (std::uint32_t c = 0; c < u.width(); c += patch_.width)
        sum += inner_->value(extract(u, patch_, r, c));
    return sum;
  }
  double weak_convexity() const override { return inner_->weak_convexity(); }
  double gradient_lipschitz() const override {
    return inner_->gradient_lipschitz();
  }

 private:
  std::unique_ptr<Potential> inner_;
  Shape patch_;
};

}  // namespace

TiledDenoiser::TiledDenoiser(std::shared_ptr<const Denoiser> patch_denoiser,
                             Shape patch)
    : inner_(std::move(patch_denoiser)), patch_(patch) {
  if (!inner_) throw DomainError("TiledDenoiser needs a patch denoiser");
  if (patch_.size() == 0) throw ShapeError("empty tile shape");
}

template <class Fn>
Image TiledDenoiser::map_tiles(const Image& x, Fn&& fn) const {
  if (x.channels() != patch_.channels || x.height() % patch_.height != 0 ||
      x.width() % patch_.width != 0) {
    throw ShapeError("image " + to_string(x.shape()) +
                     " cannot be tiled by patches " + to_string(patch_));
  }
  Image out = Image::zeros_like(x);
  for (std::uint32_t r = 0; r < x.height(); r += patch_.height)
    for (std::uint32_t c = 0; c < x.width(); c += patch_.width)
      insert(out, fn(r, c), r, c);
  return out;
}

Image TiledDenoiser::apply(const Image& x, double sigma) const {
  return map_tiles(x, [&](std::uint32_t r, std::uint32_t c) {
    return inner_->apply(extract(x, patch_, r, c), sigma);
  });
}

Image TiledDenoiser::jvp(const Image& x, const Image& v, double sigma) const {
  require_same_shape(x, v, "TiledDenoiser::jvp");
  return map_tiles(x, [&](std::uint32_t r, std::uint32_t c) {
    return inner_->jvp(extract(x, patch_, r, c), extract(v, patch_, r, c),
                       sigma);
  });
}

Image TiledDenoiser::vjp(const Image& x, const Image& v, double sigma) const {
  require_same_shape(x, v, "TiledDenoiser::vjp");
  return map_tiles(x, [&](std::uint32_t r, std::uint32_t c) {
    return inner_->vjp(extract(x, patch_, r, c), extract(v, patch_, r, c),
                       sigma);
  });
}

std::unique_ptr<Potential> TiledDenoiser::explicit_potential(
    double t, double beta, double sigma) const {
  auto inner = inner_->explicit_potential(t, beta, sigma);
  if (!inner) return nullptr;
  return std::make_unique<TiledPotential>(std::move(inner), patch_);
}

}  // namespace cocopnp
