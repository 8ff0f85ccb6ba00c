#include "cocopnp/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "cocopnp/errors.hpp"
#include "cocopnp/image_io.hpp"

namespace cocopnp {

namespace {

void check_patch(const Shape& patch) {
  if (patch.height == 0 || patch.width == 0) {
    throw DomainError("patch dimensions must be positive");
  }
  if (patch.channels != 1 && patch.channels != 3) {
    throw DomainError("patch channels must be 1 or 3");
  }
}

Image to_channels(const Image& img, std::uint32_t channels) {
  if (img.channels() == channels) return img;
  Image out(Shape{img.height(), img.width(), channels});
  for (std::uint32_t i = 0; i < img.height(); ++i) {
    for (std::uint32_t j = 0; j < img.width(); ++j) {
      if (channels == 1) {
        double sum = 0.0;
        for (std::uint32_t c = 0; c < img.channels(); ++c) sum += img.at(i, j, c);
        out.at(i, j) = sum / img.channels();
      } else {
        for (std::uint32_t c = 0; c < channels; ++c) out.at(i, j, c) = img.at(i, j);
      }
    }
  }
  return out;
}

std::uint32_t below(Xoshiro256& rng, std::uint32_t n) {
  return static_cast<std::uint32_t>(rng() % n);
}

}  // namespace

PatchDataset PatchDataset::synthetic(Shape patch) {
  check_patch(patch);
  return PatchDataset(patch);
}

PatchDataset PatchDataset::from_directory(const std::filesystem::path& dir,
                                          Shape patch) {
  check_patch(patch);
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("dataset directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  PatchDataset ds(patch);
  for (const auto& file : files) {
    Image img = to_channels(read_png(file), patch.channels);
    if (img.height() >= patch.height && img.width() >= patch.width) {
      ds.images_.push_back(std::move(img));
    }
  }
  if (ds.images_.empty()) {
    throw IoError("no PNG at least " + to_string(patch) + " in " + dir.string());
  }
  return ds;
}

Image PatchDataset::sample(Xoshiro256& rng) const {
  if (images_.empty()) return synthetic_patch(rng);
  const Image& src = images_[below(rng, static_cast<std::uint32_t>(images_.size()))];
  const std::uint32_t r0 = below(rng, src.height() - patch_.height + 1);
  const std::uint32_t c0 = below(rng, src.width() - patch_.width + 1);
  Image out(patch_);
  for (std::uint32_t i = 0; i < patch_.height; ++i) {
    for (std::uint32_t j = 0; j < patch_.width; ++j) {
      for (std::uint32_t c = 0; c < patch_.channels; ++c) {
        out.at(i, j, c) = src.at(r0 + i, c0 + j, c);
      }
    }
  }
  return out;
}

Image PatchDataset::synthetic_patch(Xoshiro256& rng) const {
  Image out(patch_);
  const double h = patch_.height;
  const double w = patch_.width;
  if (rng.uniform() < 0.5) {
    // Piecewise constant: a background with one rectangle or one edge.
    for (std::uint32_t c = 0; c < patch_.channels; ++c) {
      const double base = rng.uniform();
      const double level = rng.uniform();
      const bool rectangle = rng.uniform() < 0.5;
      const double r0 = rng.uniform() * h, r1 = rng.uniform() * h;
      const double c0 = rng.uniform() * w, c1 = rng.uniform() * w;
      const double angle = 2.0 * M_PI * rng.uniform();
      const double offset = (rng.uniform() - 0.5) * std::max(h, w);
      for (std::uint32_t i = 0; i < patch_.height; ++i) {
        for (std::uint32_t j = 0; j < patch_.width; ++j) {
          bool inside;
          if (rectangle) {
            inside = i >= std::min(r0, r1) && i <= std::max(r0, r1) &&
                     j >= std::min(c0, c1) && j <= std::max(c0, c1);
          } else {
            const double y = i - 0.5 * (h - 1);
            const double x = j - 0.5 * (w - 1);
            inside = std::cos(angle) * x + std::sin(angle) * y > offset;
          }
          out.at(i, j, c) = inside ? level : base;
        }
      }
    }
  } else {
    // Smooth affine ramp rescaled into a random subinterval of [0,1].
    for (std::uint32_t c = 0; c < patch_.channels; ++c) {
      const double gy = rng.uniform() - 0.5;
      const double gx = rng.uniform() - 0.5;
      const double lo = 0.5 * rng.uniform();
      const double hi = lo + (1.0 - lo) * rng.uniform();
      double vmin = std::numeric_limits<double>::infinity(), vmax = -std::numeric_limits<double>::infinity();
      for (std::uint32_t i = 0; i < patch_.height; ++i) {
        for (std::uint32_t j = 0; j < patch_.width; ++j) {
          const double v = gy * i + gx * j;
          out.at(i, j, c) = v;
          vmin = std::min(vmin, v);
          vmax = std::max(vmax, v);
        }
      }
      const double span = vmax - vmin;
      for (std::uint32_t i = 0; i < patch_.height; ++i) {
        for (std::uint32_t j = 0; j < patch_.width; ++j) {
          const double s = span > 0.0 ? (out.at(i, j, c) - vmin) / span : 0.5;
          out.at(i, j, c) = lo + (hi - lo) * s;
        }
      }
    }
  }
  return out;
}

}  // namespace cocopnp
