#pragma once

#include <optional>
#include <string>

#include "cocopnp/image.hpp"

namespace cocopnp {

/// Forward model K with its adjoint. Values are immutable after construction
/// and safe for concurrent use.
class LinearOperator {
 public:
  enum class Kind { identity, convolution, decimation };

  static LinearOperator identity();
  /// Circular convolution with periodic boundary. The kernel is a
  /// single-channel image, nonnegative and summing to 1 (within 1e-9), with
  /// its center at (height/2, width/2).
  static LinearOperator convolution(Image kernel);
  /// Keeps pixel (i*factor, j*factor) of every channel.
  static LinearOperator decimation(std::uint32_t factor);

  Kind kind() const { return kind_; }
  std::string describe() const;
  const Image& kernel() const { return kernel_; }
  std::uint32_t factor() const { return factor_; }

  /// Shape of Kx for an input of shape `in`; throws ShapeError when the
  /// input is incompatible.
  Shape output_shape(const Shape& in) const;

  Image forward(const Image& x) const;
  Image adjoint(const Image& y) const;

  /// Solves (beta I + rho K^T K) x = rhs directly when K admits it (identity
  /// and circular convolution); returns nullopt otherwise.
  std::optional<Image> solve_normal(double beta, double rho,
                                    const Image& rhs) const;

 private:
  LinearOperator() = default;

  Kind kind_ = Kind::identity;
  Image kernel_;
  std::uint32_t factor_ = 1;
};

}  // namespace cocopnp
