#include "cli_common.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <type_traits>
#include <variant>

#include "cocopnp/dct_denoiser.hpp"
#include "cocopnp/denoiser_io.hpp"
#include "cocopnp/errors.hpp"
#include "cocopnp/image_io.hpp"
#include "cocopnp/tiled_denoiser.hpp"

namespace cocopnp::cli {

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001B3ULL;
    }
  }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    bytes(b, 8);
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

}  // namespace

std::string kernel_hash(const Image& kernel) {
  Fnv1a h;
  h.u32(kernel.height());
  h.u32(kernel.width());
  for (Eigen::Index i = 0; i < kernel.size(); ++i) h.f64(kernel.values()[i]);
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h.value();
  return out.str();
}

void require_exists(const std::filesystem::path& path, const char* what) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError(std::string(what) + " not found: " + path.string());
  }
}

LoadedKernel load_kernel(const std::filesystem::path& path) {
  require_exists(path, "kernel file");
  Image k = path.extension() == ".png" ? read_png(path) : read_text_matrix(path);
  if (k.channels() != 1) {
    throw ConfigError("kernel " + path.string() + " must be grayscale");
  }
  if ((k.values().array() < 0.0).any()) {
    throw ConfigError("kernel " + path.string() + " has negative entries");
  }
  const double sum = k.values().sum();
  if (!(sum > 0.0)) {
    throw ConfigError("kernel " + path.string() + " sums to zero");
  }
  LoadedKernel out{(1.0 / sum) * k, sum, std::fabs(sum - 1.0) > 1e-6};
  if (out.renormalized) {
    std::cerr << "warning: kernel " << path.string() << " sums to " << sum
              << "; renormalized to 1\n";
  }
  return out;
}

std::shared_ptr<const Denoiser> DenoiserChoice::for_images() const {
  if (!patch) return denoiser;
  return std::make_shared<TiledDenoiser>(denoiser, *patch);
}

DenoiserChoice make_denoiser(const std::string& spec, double dct_scale) {
  if (spec == "dct") {
    if (!(dct_scale > 0.0)) throw ConfigError("dct-scale must be positive");
    return {std::make_shared<DctSoftThresholdDenoiser>(dct_scale), std::nullopt};
  }
  require_exists(spec, "denoiser checkpoint");
  const ParametricDenoiser loaded = load_denoiser(spec);
  auto shared = std::visit(
      [](const auto& d) -> std::shared_ptr<const Denoiser> {
        return std::make_shared<std::decay_t<decltype(d)>>(d);
      },
      loaded);
  return {std::move(shared), patch_shape(loaded)};
}

Shape parse_shape(const std::string& text) {
  unsigned h = 0, w = 0, c = 1;
  int used = 0;
  const int n = std::sscanf(text.c_str(), "%ux%u%n", &h, &w, &used);
  bool ok = n == 2;
  if (ok && text[used] == 'x') {
    int more = 0;
    ok = std::sscanf(text.c_str() + used, "x%u%n", &c, &more) == 1;
    used += more;
  }
  ok = ok && static_cast<std::size_t>(used) == text.size() && h > 0 && w > 0 &&
       (c == 1 || c == 3);
  if (!ok) throw ConfigError("bad shape '" + text + "'; expected HxW or HxWxC");
  return {h, w, c};
}

void write_json(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

std::filesystem::path prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
  return dir;
}

void write_replay_config(const std::filesystem::path& path,
                         const CLI::App& sub) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "[" << sub.get_name() << "]\n" << sub.config_to_str(true, false);
}

std::string version() { return COCOPNP_VERSION; }

}  // namespace cocopnp::cli
