#include "cocopnp/linear_operator.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "cocopnp/errors.hpp"
#include "fft.hpp"

namespace cocopnp {

namespace {

using Spectrum = std::vector<std::complex<double>>;

/// Transfer function of the centered kernel embedded in an h x w torus.
Spectrum transfer_function(const Image& kernel, std::uint32_t h,
                           std::uint32_t w) {
  std::vector<double> embedded(static_cast<std::size_t>(h) * w, 0.0);
  const int ch = static_cast<int>(kernel.height() / 2);
  const int cw = static_cast<int>(kernel.width() / 2);
  for (std::uint32_t a = 0; a < kernel.height(); ++a) {
    for (std::uint32_t b = 0; b < kernel.width(); ++b) {
      const int i = ((static_cast<int>(a) - ch) % static_cast<int>(h) + h) % h;
      const int j = ((static_cast<int>(b) - cw) % static_cast<int>(w) + w) % w;
      embedded[static_cast<std::size_t>(i) * w + j] += kernel.at(a, b);
    }
  }
  return detail::Fft2d::get(static_cast<int>(h), static_cast<int>(w))
      .forward(embedded.data());
}

/// Applies `filter(spectrum_of_plane, k)` to every channel.
template <class Filter>
Image filter_channels(const Image& x, Filter&& filter) {
  const auto& fft = detail::Fft2d::get(static_cast<int>(x.height()),
                                       static_cast<int>(x.width()));
  Image out = Image::zeros_like(x);
  for (std::uint32_t c = 0; c < x.channels(); ++c) {
    const Image plane = x.channel(c);
    Spectrum s = fft.forward(plane.values().data());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = filter(s[k], k);
    const std::vector<double> back = fft.inverse(std::move(s));
    Image result({x.height(), x.width(), 1},
                 Eigen::Map<const Eigen::VectorXd>(
                     back.data(), static_cast<Eigen::Index>(back.size())));
    out.set_channel(c, result);
  }
  return out;
}

}  // namespace

LinearOperator LinearOperator::identity() { return LinearOperator(); }

LinearOperator LinearOperator::convolution(Image kernel) {
  if (kernel.channels() != 1 || kernel.size() == 0) {
    throw ShapeError("convolution kernel must be a nonempty single-channel grid");
  }
  if ((kernel.values().array() < 0.0).any()) {
    throw DomainError("convolution kernel has negative entries");
  }
  const double mass = kernel.values().sum();
  if (std::fabs(mass - 1.0) > 1e-9) {
    throw DomainError("convolution kernel must sum to 1, sums to " +
                      std::to_string(mass));
  }
  LinearOperator op;
  op.kind_ = Kind::convolution;
  op.kernel_ = std::move(kernel);
  return op;
}

LinearOperator LinearOperator::decimation(std::uint32_t factor) {
  if (factor == 0) throw DomainError("decimation factor must be positive");
  LinearOperator op;
  op.kind_ = Kind::decimation;
  op.factor_ = factor;
  return op;
}

std::string LinearOperator::describe() const {
  switch (kind_) {
    case Kind::identity:
      return "identity";
    case Kind::convolution:
      return "circular-convolution(" + std::to_string(kernel_.height()) + "x" +
             std::to_string(kernel_.width()) + ")";
    case Kind::decimation:
      return "decimation(" + std::to_string(factor_) + ")";
  }
  return "unknown";
}

Shape LinearOperator::output_shape(const Shape& in) const {
  switch (kind_) {
    case Kind::identity:
      return in;
    case Kind::convolution:
      if (kernel_.height() > in.height || kernel_.width() > in.width) {
        throw ShapeError("kernel " + to_string(kernel_.shape()) +
                         " larger than image " + to_string(in));
      }
      return in;
    case Kind::decimation:
      if (in.height % factor_ != 0 || in.width % factor_ != 0) {
        throw ShapeError("image " + to_string(in) +
                         " not divisible by decimation factor " +
                         std::to_string(factor_));
      }
      return {in.height / factor_, in.width / factor_, in.channels};
  }
  throw ShapeError("unknown operator kind");
}

Image LinearOperator::forward(const Image& x) const {
  const Shape out_shape = output_shape(x.shape());
  switch (kind_) {
    case Kind::identity:
      return x;
    case Kind::convolution: {
      const Spectrum h = transfer_function(kernel_, x.height(), x.width());
      return filter_channels(
          x, [&](std::complex<double> s, std::size_t k) { return s * h[k]; });
    }
    case Kind::decimation: {
      Image y(out_shape);
      for (std::uint32_t i = 0; i < out_shape.height; ++i)
        for (std::uint32_t j = 0; j < out_shape.width; ++j)
          for (std::uint32_t c = 0; c < x.channels(); ++c)
            y.at(i, j, c) = x.at(i * factor_, j * factor_, c);
      return y;
    }
  }
  throw ShapeError("unknown operator kind");
}

Image LinearOperator::adjoint(const Image& y) const {
  switch (kind_) {
    case Kind::identity:
      return y;
    case Kind::convolution: {
      output_shape(y.shape());
      const Spectrum h = transfer_function(kernel_, y.height(), y.width());
      return filter_channels(y, [&](std::complex<double> s, std::size_t k) {
        return s * std::conj(h[k]);
      });
    }
    case Kind::decimation: {
      Image x({y.height() * factor_, y.width() * factor_, y.channels()});
      for (std::uint32_t i = 0; i < y.height(); ++i)
        for (std::uint32_t j = 0; j < y.width(); ++j)
          for (std::uint32_t c = 0; c < y.channels(); ++c)
            x.at(i * factor_, j * factor_, c) = y.at(i, j, c);
      return x;
    }
  }
  throw ShapeError("unknown operator kind");
}

std::optional<Image> LinearOperator::solve_normal(double beta, double rho,
                                                  const Image& rhs) const {
  switch (kind_) {
    case Kind::identity:
      return (1.0 / (beta + rho)) * rhs;
    case Kind::convolution: {
      output_shape(rhs.shape());
      const Spectrum h = transfer_function(kernel_, rhs.height(), rhs.width());
      return filter_channels(rhs, [&](std::complex<double> s, std::size_t k) {
        return s / (beta + rho * std::norm(h[k]));
      });
    }
    case Kind::decimation:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace cocopnp
