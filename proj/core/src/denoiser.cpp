#include "cocopnp/denoiser.hpp"

#include <utility>

#include "cocopnp/errors.hpp"

namespace cocopnp {

namespace {
void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("averaging parameter t must lie in [0,1], got " +
                      std::to_string(t));
  }
}
}  // namespace

Image averaged_apply(const Denoiser& d, double t, const Image& x,
                     double sigma) {
  check_t(t);
  if (t == 0.0) return x;
  return combine(t, d.apply(x, sigma), 1.0 - t, x);
}

Image averaged_jvp(const Denoiser& d, double t, const Image& x, const Image& v,
                   double sigma) {
  check_t(t);
  if (t == 0.0) return v;
  return combine(t, d.jvp(x, v, sigma), 1.0 - t, v);
}

Image averaged_vjp(const Denoiser& d, double t, const Image& x, const Image& v,
                   double sigma) {
  check_t(t);
  if (t == 0.0) return v;
  return combine(t, d.vjp(x, v, sigma), 1.0 - t, v);
}

AveragedDenoiser::AveragedDenoiser(std::shared_ptr<const Denoiser> inner,
                                   double t)
    : inner_(std::move(inner)), t_(t) {
  if (!inner_) throw DomainError("AveragedDenoiser needs a denoiser");
  check_t(t);
}

Image AveragedDenoiser::apply(const Image& x, double sigma) const {
  return averaged_apply(*inner_, t_, x, sigma);
}

Image AveragedDenoiser::jvp(const Image& x, const Image& v,
                            double sigma) const {
  return averaged_jvp(*inner_, t_, x, v, sigma);
}

Image AveragedDenoiser::vjp(const Image& x, const Image& v,
                            double sigma) const {
  return averaged_vjp(*inner_, t_, x, v, sigma);
}

std::optional<double> AveragedDenoiser::claimed_gamma() const {
  const auto g = inner_->claimed_gamma();
  if (!g) return std::nullopt;
  return *g / (t_ + *g * (1.0 - t_));
}

std::string AveragedDenoiser::name() const {
  return "averaged(" + inner_->name() + ", t=" + std::to_string(t_) + ")";
}

double sample_cocoercivity_defect(const Denoiser& d, const Image& x,
                                  const Image& y, double sigma, double gamma) {
  require_same_shape(x, y, "sample_cocoercivity_defect");
  const Image diff_out = d.apply(x, sigma) - d.apply(y, sigma);
  const Image diff_in = x - y;
  return gamma * squared_norm(diff_out) - dot(diff_in, diff_out);
}

Eigen::MatrixXd dense_jacobian(const Denoiser& d, const Image& x,
                               double sigma) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac(n, n);
  Image e = Image::zeros_like(x);
  for (Eigen::Index j = 0; j < n; ++j) {
    e.values()[j] = 1.0;
    jac.col(j) = d.jvp(x, e, sigma).values();
    e.values()[j] = 0.0;
  }
  return jac;
}

}  // namespace cocopnp
