#include "cocopnp/small_net_denoiser.hpp"

#include <cmath>
#include <random>

#include "cocopnp/errors.hpp"
#include "cocopnp/rng.hpp"

namespace cocopnp {

namespace {
Eigen::ArrayXd tanh_derivative(const Eigen::ArrayXd& a) {
  return 1.0 - a.tanh().square();
}
}  // namespace

SmallNetDenoiser::SmallNetDenoiser(Shape patch, Eigen::Index hidden,
                                   Eigen::VectorXd theta,
                                   std::optional<double> claimed_gamma)
    : patch_(patch),
      n_(patch.size()),
      hidden_(hidden),
      theta_(std::move(theta)),
      gamma_(claimed_gamma) {
  if (n_ <= 0 || hidden_ <= 0) {
    throw ShapeError("SmallNetDenoiser needs positive input and hidden sizes");
  }
  const Eigen::Index count = parameter_count(n_, hidden_);
  if (count > kMaxParameters) {
    throw DomainError("SmallNetDenoiser has " + std::to_string(count) +
                      " parameters, limit is " +
                      std::to_string(kMaxParameters));
  }
  if (theta_.size() != count) {
    throw ShapeError("SmallNetDenoiser expects " + std::to_string(count) +
                     " parameters, got " + std::to_string(theta_.size()));
  }
}

SmallNetDenoiser SmallNetDenoiser::make_random(Shape patch, Eigen::Index hidden,
                                               std::uint64_t seed) {
  const Eigen::Index n = patch.size();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(parameter_count(n, hidden));
  Xoshiro256 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index w1 = hidden * (n + 1);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(n + 1));
  for (Eigen::Index i = 0; i < w1; ++i) theta[i] = s1 * normal(rng);
  const Eigen::Index w2_begin = w1 + hidden;
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index i = 0; i < n * hidden; ++i) {
    theta[w2_begin + i] = s2 * normal(rng);
  }
  return SmallNetDenoiser(patch, hidden, std::move(theta));
}

SmallNetDenoiser::Layers SmallNetDenoiser::layers(
    const Eigen::VectorXd& theta) const {
  const double* p = theta.data();
  const Eigen::Index w1 = hidden_ * (n_ + 1);
  return Layers{
      Eigen::Map<const Eigen::MatrixXd>(p, hidden_, n_ + 1),
      Eigen::Map<const Eigen::VectorXd>(p + w1, hidden_),
      Eigen::Map<const Eigen::MatrixXd>(p + w1 + hidden_, n_, hidden_),
      Eigen::Map<const Eigen::VectorXd>(p + w1 + hidden_ + n_ * hidden_, n_)};
}

Eigen::VectorXd SmallNetDenoiser::pre_activation(const Layers& l,
                                                 const Eigen::VectorXd& y,
                                                 double sigma) const {
  return l.w1.leftCols(n_) * y + sigma * l.w1.col(n_) + l.b1;
}

void SmallNetDenoiser::check(const Image& x) const {
  if (x.size() != n_) {
    throw ShapeError("SmallNetDenoiser expects " + std::to_string(n_) +
                     " values, got " + std::to_string(x.size()));
  }
}

Image SmallNetDenoiser::apply(const Image& x, double sigma) const {
  check(x);
  const Layers l = layers(theta_);
  const Eigen::VectorXd a = pre_activation(l, x.values(), sigma);
  return Image(x.shape(), l.w2 * a.array().tanh().matrix() + l.b2);
}

Image SmallNetDenoiser::jvp(const Image& x, const Image& v,
                            double sigma) const {
  check(x);
  require_same_shape(x, v, "SmallNetDenoiser::jvp");
  const Layers l = layers(theta_);
  const Eigen::VectorXd a = pre_activation(l, x.values(), sigma);
  const Eigen::VectorXd inner =
      (tanh_derivative(a) * (l.w1.leftCols(n_) * v.values()).array()).matrix();
  return Image(v.shape(), l.w2 * inner);
}

Image SmallNetDenoiser::vjp(const Image& x, const Image& v,
                            double sigma) const {
  check(x);
  require_same_shape(x, v, "SmallNetDenoiser::vjp");
  const Layers l = layers(theta_);
  const Eigen::VectorXd a = pre_activation(l, x.values(), sigma);
  const Eigen::VectorXd inner =
      (tanh_derivative(a) * (l.w2.transpose() * v.values()).array()).matrix();
  return Image(v.shape(), l.w1.leftCols(n_).transpose() * inner);
}

Eigen::VectorXd SmallNetDenoiser::parameter_gradient(
    const Eigen::VectorXd& y, double sigma, const Eigen::VectorXd& g) const {
  const Layers l = layers(theta_);
  const Eigen::VectorXd a = pre_activation(l, y, sigma);
  const Eigen::VectorXd h = a.array().tanh().matrix();
  const Eigen::VectorXd ga =
      (tanh_derivative(a) * (l.w2.transpose() * g).array()).matrix();

  Eigen::VectorXd grad(theta_.size());
  Eigen::Map<Eigen::MatrixXd> gw1(grad.data(), hidden_, n_ + 1);
  gw1.leftCols(n_).noalias() = ga * y.transpose();
  gw1.col(n_) = sigma * ga;
  const Eigen::Index w1 = hidden_ * (n_ + 1);
  grad.segment(w1, hidden_) = ga;
  Eigen::Map<Eigen::MatrixXd> gw2(grad.data() + w1 + hidden_, n_, hidden_);
  gw2.noalias() = g * h.transpose();
  grad.tail(n_) = g;
  return grad;
}

double SmallNetDenoiser::bilinear_jacobian(const Eigen::VectorXd& theta,
                                           const Eigen::VectorXd& y,
                                           double sigma,
                                           const Eigen::VectorXd& p,
                                           const Eigen::VectorXd& q) const {
  const Layers l = layers(theta);
  const Eigen::VectorXd a = pre_activation(l, y, sigma);
  const Eigen::ArrayXd left = (l.w2.transpose() * p).array();
  const Eigen::ArrayXd right = (l.w1.leftCols(n_) * q).array();
  return (left * tanh_derivative(a) * right).sum();
}

}  // namespace cocopnp
