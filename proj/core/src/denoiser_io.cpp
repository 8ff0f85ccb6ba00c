#include "cocopnp/denoiser_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "cocopnp/errors.hpp"

namespace cocopnp {

namespace {

constexpr char kMagic[8] = {'C', 'P', 'N', 'P', 'D', 'E', 'N', '1'};
constexpr std::uint32_t kLinear = 1;
constexpr std::uint32_t kSmallNet = 2;

struct Header {
  std::uint32_t kind;
  Shape patch;
  std::uint32_t hidden;
  std::optional<double> gamma;
};

template <class T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T take(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

void write_header(std::ofstream& out, const Header& h) {
  out.write(kMagic, sizeof(kMagic));
  put(out, h.kind);
  put(out, h.patch.height);
  put(out, h.patch.width);
  put(out, h.patch.channels);
  put(out, h.hidden);
  put(out, h.gamma.value_or(std::numeric_limits<double>::quiet_NaN()));
}

void write_payload(std::ofstream& out, const double* data, Eigen::Index n) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(double)));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  return out;
}

}  // namespace

void save_denoiser(const std::filesystem::path& path,
                   const LinearDenoiser& d) {
  std::ofstream out = open_out(path);
  write_header(out, {kLinear, d.patch_shape(), 0, d.claimed_gamma()});
  using RowMatrix =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMatrix w = d.weight();
  write_payload(out, w.data(), w.size());
  write_payload(out, d.offset().data(), d.offset().size());
  if (!out) throw IoError("write failed for " + path.string());
}

void save_denoiser(const std::filesystem::path& path,
                   const SmallNetDenoiser& d) {
  std::ofstream out = open_out(path);
  write_header(out, {kSmallNet, d.patch_shape(),
                     static_cast<std::uint32_t>(d.hidden()),
                     d.claimed_gamma()});
  write_payload(out, d.parameters().data(), d.parameters().size());
  if (!out) throw IoError("write failed for " + path.string());
}

ParametricDenoiser load_denoiser(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw IoError(path.string() + " is not a CPNPDEN1 checkpoint");
  }
  Header h{};
  h.kind = take<std::uint32_t>(in);
  h.patch.height = take<std::uint32_t>(in);
  h.patch.width = take<std::uint32_t>(in);
  h.patch.channels = take<std::uint32_t>(in);
  h.hidden = take<std::uint32_t>(in);
  const double gamma = take<double>(in);
  if (!std::isnan(gamma)) h.gamma = gamma;
  if (!in) throw IoError(path.string() + ": truncated header");

  const Eigen::Index n = h.patch.size();
  auto read_vector = [&](Eigen::Index count) {
    Eigen::VectorXd v(count);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw IoError(path.string() + ": truncated payload");
    return v;
  };

  try {
    if (h.kind == kLinear) {
      const Eigen::VectorXd w = read_vector(n * n);
      Eigen::VectorXd b = read_vector(n);
      Eigen::MatrixXd weight(n, n);
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) weight(r, c) = w[r * n + c];
      return LinearDenoiser(std::move(weight), std::move(b), h.gamma, h.patch);
    }
    if (h.kind == kSmallNet) {
      const Eigen::Index count =
          SmallNetDenoiser::parameter_count(n, h.hidden);
      if (count > SmallNetDenoiser::kMaxParameters) {
        throw IoError(path.string() + ": parameter count exceeds limit");
      }
      return SmallNetDenoiser(h.patch, h.hidden, read_vector(count), h.gamma);
    }
  } catch (const ShapeError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  throw IoError(path.string() + ": unknown denoiser kind " +
                std::to_string(h.kind));
}

std::shared_ptr<const Denoiser> load_denoiser_shared(
    const std::filesystem::path& path) {
  return std::visit(
      [](auto&& d) -> std::shared_ptr<const Denoiser> {
        using T = std::decay_t<decltype(d)>;
        return std::make_shared<T>(std::move(d));
      },
      load_denoiser(path));
}

Shape patch_shape(const ParametricDenoiser& d) {
  return std::visit([](const auto& x) { return x.patch_shape(); }, d);
}

}  // namespace cocopnp
