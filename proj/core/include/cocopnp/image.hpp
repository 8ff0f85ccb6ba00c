#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace cocopnp {

struct Shape {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 1;

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(height) * width * channels;
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Real-valued image stored row-major with interleaved channels
/// (index = (row * width + col) * channels + channel).
class Image {
 public:
  Image() = default;
  explicit Image(Shape shape, double fill = 0.0);
  Image(Shape shape, Eigen::VectorXd values);

  static Image zeros_like(const Image& other) { return Image(other.shape_); }

  const Shape& shape() const { return shape_; }
  std::uint32_t height() const { return shape_.height; }
  std::uint32_t width() const { return shape_.width; }
  std::uint32_t channels() const { return shape_.channels; }
  Eigen::Index size() const { return values_.size(); }
  bool empty() const { return values_.size() == 0; }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  double& at(std::uint32_t row, std::uint32_t col, std::uint32_t ch = 0) {
    return values_[index(row, col, ch)];
  }
  double at(std::uint32_t row, std::uint32_t col, std::uint32_t ch = 0) const {
    return values_[index(row, col, ch)];
  }

  /// Copy of one channel as a height x width single-channel image.
  Image channel(std::uint32_t ch) const;
  void set_channel(std::uint32_t ch, const Image& plane);

  bool all_finite() const { return values_.allFinite(); }

  Image& operator+=(const Image& rhs);
  Image& operator-=(const Image& rhs);
  Image& operator*=(double s);

 private:
  Eigen::Index index(std::uint32_t row, std::uint32_t col,
                     std::uint32_t ch) const {
    return (static_cast<Eigen::Index>(row) * shape_.width + col) *
               shape_.channels +
           ch;
  }

  Shape shape_{};
  Eigen::VectorXd values_;
};

/// Throws ShapeError naming `what` unless the shapes agree.
void require_same_shape(const Image& a, const Image& b, const char* what);

Image operator+(Image a, const Image& b);
Image operator-(Image a, const Image& b);
Image operator*(double s, Image a);
Image operator*(Image a, double s);

double dot(const Image& a, const Image& b);
double norm(const Image& a);
double squared_norm(const Image& a);

/// a*x + b*y, shapes must agree.
Image combine(double a, const Image& x, double b, const Image& y);

}  // namespace cocopnp
