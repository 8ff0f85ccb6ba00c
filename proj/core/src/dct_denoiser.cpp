#include "cocopnp/dct_denoiser.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "cocopnp/errors.hpp"

namespace cocopnp {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd dct_matrix(Eigen::Index n) {
  Eigen::MatrixXd c(n, n);
  const double nd = static_cast<double>(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double alpha = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (Eigen::Index i = 0; i < n; ++i) {
      c(k, i) = alpha * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k /
                                 (2.0 * nd));
    }
  }
  return c;
}

template <bool Inverse>
Image separable(const Image& x) {
  const Eigen::MatrixXd ch = dct_matrix(x.height());
  const Eigen::MatrixXd cw = dct_matrix(x.width());
  Image out = Image::zeros_like(x);
  for (std::uint32_t c = 0; c < x.channels(); ++c) {
    const Image plane = x.channel(c);
    const Eigen::Map<const RowMatrix> p(plane.values().data(), x.height(),
                                        x.width());
    RowMatrix q;
    if constexpr (Inverse) {
      q = ch.transpose() * p * cw;
    } else {
      q = ch * p * cw.transpose();
    }
    Image result({x.height(), x.width(), 1},
                 Eigen::Map<const Eigen::VectorXd>(q.data(), q.size()));
    out.set_channel(c, result);
  }
  return out;
}

class HuberPotential final : public Potential {
 public:
  HuberPotential(double t, double beta, double tau)
      : t_(t), beta_(beta), tau_(tau) {}

  double value(const Image& u) const override {
    const Image coeffs = DctSoftThresholdDenoiser::transform(u);
    double sum = 0.0;
    for (const double p : coeffs.values()) sum += scalar(std::fabs(p));
    return beta_ * sum;
  }
  double weak_convexity() const override { return 0.0; }
  double gradient_lipschitz() const override {
    return t_ >= 1.0 ? kInfinity : beta_ * t_ / (1.0 - t_);
  }

 private:
  // Potential h with prox_h equal to t * soft_tau + (1 - t) * I.
  double scalar(double a) const {
    if (t_ == 0.0) return 0.0;
    if (t_ >= 1.0) return tau_ * a;
    const double knee = (1.0 - t_) * tau_;
    if (a <= knee) return 0.5 * t_ / (1.0 - t_) * a * a;
    return t_ * tau_ * a - 0.5 * t_ * (1.0 - t_) * tau_ * tau_;
  }

  double t_;
  double beta_;
  double tau_;
};

}  // namespace

DctSoftThresholdDenoiser::DctSoftThresholdDenoiser(double threshold_scale)
    : scale_(threshold_scale) {
  if (!(threshold_scale >= 0.0)) {
    throw DomainError("DCT threshold scale must be nonnegative");
  }
}

Image DctSoftThresholdDenoiser::transform(const Image& x) {
  return separable<false>(x);
}

Image DctSoftThresholdDenoiser::inverse_transform(const Image& coeffs) {
  return separable<true>(coeffs);
}

Image DctSoftThresholdDenoiser::apply(const Image& x, double sigma) const {
  const double tau = threshold(sigma);
  Image coeffs = transform(x);
  for (double& c : coeffs.values()) {
    const double mag = std::fabs(c) - tau;
    c = mag > 0.0 ? std::copysign(mag, c) : 0.0;
  }
  return inverse_transform(coeffs);
}

Image DctSoftThresholdDenoiser::jvp(const Image& x, const Image& v,
                                    double sigma) const {
  require_same_shape(x, v, "DctSoftThresholdDenoiser::jvp");
  const double tau = threshold(sigma);
  const Image cx = transform(x);
  Image cv = transform(v);
  for (Eigen::Index i = 0; i < cv.size(); ++i) {
    if (!(std::fabs(cx.values()[i]) > tau)) cv.values()[i] = 0.0;
  }
  return inverse_transform(cv);
}

Image DctSoftThresholdDenoiser::vjp(const Image& x, const Image& v,
                                    double sigma) const {
  return jvp(x, v, sigma);
}

std::unique_ptr<Potential> DctSoftThresholdDenoiser::explicit_potential(
    double t, double beta, double sigma) const {
  if (!(t >= 0.0 && t <= 1.0) || !(beta > 0.0)) return nullptr;
  return std::make_unique<HuberPotential>(t, beta, threshold(sigma));
}

}  // namespace cocopnp
