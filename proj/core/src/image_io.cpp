#include "cocopnp/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "cocopnp/errors.hpp"

namespace cocopnp {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace {

constexpr char kDumpMagic[8] = {'C', 'P', 'N', 'P', 'I', 'M', 'G', '1'};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError(path.string() + " is not a PNG file");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  png_set_expand(png);
  png_read_update_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer.data() + r * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) {
    throw IoError(path.string() + ": unsupported channel count " +
                  std::to_string(channels));
  }
  Image img({height, width, static_cast<std::uint32_t>(channels)});
  for (png_uint_32 r = 0; r < height; ++r) {
    for (png_uint_32 c = 0; c < width * static_cast<png_uint_32>(channels); ++c) {
      img.values()[static_cast<Eigen::Index>(r) * width * channels + c] =
          buffer[r * stride + c] / 255.0;
    }
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw ShapeError("PNG output needs 1 or 3 channels");
  }
  FilePtr file = open_file(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  const std::size_t stride =
      static_cast<std::size_t>(img.width()) * img.channels();
  std::vector<unsigned char> buffer(stride * img.height());
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img.values()[i], 0.0, 1.0);
    buffer[static_cast<std::size_t>(i)] =
        static_cast<unsigned char>(std::lround(v * 255.0));
  }
  std::vector<png_bytep> rows(img.height());
  for (std::uint32_t r = 0; r < img.height(); ++r) {
    rows[r] = buffer.data() + r * stride;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, img.width(), img.height(), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_dump(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  out.write(kDumpMagic, sizeof(kDumpMagic));
  const std::uint32_t dims[3] = {img.height(), img.width(), img.channels()};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(img.values().data()),
            static_cast<std::streamsize>(img.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

Image read_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  std::uint32_t dims[3];
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || std::memcmp(magic, kDumpMagic, sizeof(magic)) != 0) {
    throw IoError(path.string() + " is not a CPNPIMG1 dump");
  }
  const Shape shape{dims[0], dims[1], dims[2]};
  if (shape.channels != 1 && shape.channels != 3) {
    throw IoError(path.string() + ": bad channel count in header");
  }
  Eigen::VectorXd values(shape.size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw IoError(path.string() + ": truncated dump");
  return Image(shape, std::move(values));
}

Image read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("file not found: " + path.string());
  }
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" ? read_png(path) : read_dump(path);
}

Image read_text_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw IoError(path.string() + ": non-numeric entry");
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path.string() + ": empty matrix");
  const std::size_t width = rows.front().size();
  Image img({static_cast<std::uint32_t>(rows.size()),
             static_cast<std::uint32_t>(width), 1});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw IoError(path.string() + ": ragged matrix rows");
    }
    for (std::size_t c = 0; c < width; ++c) {
      img.at(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c)) =
          rows[r][c];
    }
  }
  return img;
}

}  // namespace cocopnp
