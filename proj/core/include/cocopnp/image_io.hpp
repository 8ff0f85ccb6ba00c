#pragma once

#include <filesystem>

#include "cocopnp/image.hpp"

namespace cocopnp {

/// Reads an 8-bit grayscale or RGB PNG, mapping intensities to [0,1] by /255.
/// Palette images are expanded, alpha is dropped, 16-bit is reduced to 8.
Image read_png(const std::filesystem::path& path);

/// Writes an 8-bit PNG (1 or 3 channels); values are clamped to [0,1] and
/// rounded to the nearest of 256 levels.
void write_png(const std::filesystem::path& path, const Image& img);

/// Lossless dump: magic "CPNPIMG1", height, width, channels (uint32 LE),
/// then height*width*channels float64 LE values.
void write_dump(const std::filesystem::path& path, const Image& img);
Image read_dump(const std::filesystem::path& path);

/// Dispatches on extension: ".png" uses PNG, anything else the dump format.
Image read_image(const std::filesystem::path& path);

/// Plain-text matrix (whitespace-separated rows) as a single-channel image.
Image read_text_matrix(const std::filesystem::path& path);

}  // namespace cocopnp
