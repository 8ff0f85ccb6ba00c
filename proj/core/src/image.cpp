#include "cocopnp/image.hpp"

#include <utility>

#include "cocopnp/errors.hpp"

namespace cocopnp {

std::string to_string(const Shape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
         std::to_string(s.channels);
}

Image::Image(Shape shape, double fill)
    : shape_(shape), values_(Eigen::VectorXd::Constant(shape.size(), fill)) {
  if (shape.channels != 1 && shape.channels != 3) {
    throw ShapeError("image channels must be 1 or 3, got " +
                     std::to_string(shape.channels));
  }
}

Image::Image(Shape shape, Eigen::VectorXd values)
    : shape_(shape), values_(std::move(values)) {
  if (shape.channels != 1 && shape.channels != 3) {
    throw ShapeError("image channels must be 1 or 3, got " +
                     std::to_string(shape.channels));
  }
  if (values_.size() != shape.size()) {
    throw ShapeError("image data length " + std::to_string(values_.size()) +
                     " does not match shape " + to_string(shape));
  }
}

Image Image::channel(std::uint32_t ch) const {
  if (ch >= shape_.channels) throw ShapeError("channel index out of range");
  Image plane({shape_.height, shape_.width, 1});
  const Eigen::Index n = static_cast<Eigen::Index>(shape_.height) * shape_.width;
  for (Eigen::Index i = 0; i < n; ++i) {
    plane.values_[i] = values_[i * shape_.channels + ch];
  }
  return plane;
}

void Image::set_channel(std::uint32_t ch, const Image& plane) {
  if (ch >= shape_.channels || plane.height() != shape_.height ||
      plane.width() != shape_.width || plane.channels() != 1) {
    throw ShapeError("set_channel: plane does not fit image");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(shape_.height) * shape_.width;
  for (Eigen::Index i = 0; i < n; ++i) {
    values_[i * shape_.channels + ch] = plane.values_[i];
  }
}

Image& Image::operator+=(const Image& rhs) {
  require_same_shape(*this, rhs, "operator+=");
  values_ += rhs.values_;
  return *this;
}

Image& Image::operator-=(const Image& rhs) {
  require_same_shape(*this, rhs, "operator-=");
  values_ -= rhs.values_;
  return *this;
}

Image& Image::operator*=(double s) {
  values_ *= s;
  return *this;
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

Image operator+(Image a, const Image& b) { return a += b; }
Image operator-(Image a, const Image& b) { return a -= b; }
Image operator*(double s, Image a) { return a *= s; }
Image operator*(Image a, double s) { return a *= s; }

double dot(const Image& a, const Image& b) {
  require_same_shape(a, b, "dot");
  return a.values().dot(b.values());
}

double norm(const Image& a) { return a.values().norm(); }
double squared_norm(const Image& a) { return a.values().squaredNorm(); }

Image combine(double a, const Image& x, double b, const Image& y) {
  require_same_shape(x, y, "combine");
  return Image(x.shape(), a * x.values() + b * y.values());
}

}  // namespace cocopnp
