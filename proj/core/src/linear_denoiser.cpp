#include "cocopnp/linear_denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cocopnp/errors.hpp"
#include "cocopnp/rng.hpp"

namespace cocopnp {

namespace {

class QuadraticPotential final : public Potential {
 public:
  QuadraticPotential(Eigen::MatrixXd hessian, Eigen::VectorXd linear,
                     double r, double lip)
      : hessian_(std::move(hessian)),
        linear_(std::move(linear)),
        r_(r),
        lip_(lip) {}

  double value(const Image& u) const override {
    const auto& x = u.values();
    if (x.size() != hessian_.rows()) throw ShapeError("potential dimension");
    return 0.5 * x.dot(hessian_ * x) - linear_.dot(x);
  }
  double weak_convexity() const override { return r_; }
  double gradient_lipschitz() const override { return lip_; }

 private:
  Eigen::MatrixXd hessian_;
  Eigen::VectorXd linear_;
  double r_;
  double lip_;
};

}  // namespace

LinearDenoiser::LinearDenoiser(Eigen::MatrixXd weight, Eigen::VectorXd offset,
                               std::optional<double> claimed_gamma,
                               Shape patch)
    : weight_(std::move(weight)),
      offset_(std::move(offset)),
      gamma_(claimed_gamma),
      patch_(patch) {
  if (weight_.rows() != weight_.cols() || weight_.rows() == 0) {
    throw ShapeError("LinearDenoiser weight must be a nonempty square matrix");
  }
  if (offset_.size() != weight_.rows()) {
    throw ShapeError("LinearDenoiser offset length mismatch");
  }
  if (patch_.size() == 0) {
    patch_ = {static_cast<std::uint32_t>(weight_.rows()), 1, 1};
  }
  if (patch_.size() != weight_.rows()) {
    throw ShapeError("patch shape " + to_string(patch_) +
                     " does not match dimension " +
                     std::to_string(weight_.rows()));
  }
  if (gamma_ && !(*gamma_ > 0.0)) throw DomainError("gamma must be positive");
}

LinearDenoiser LinearDenoiser::make_certified(Shape patch, double gamma,
                                              std::uint64_t seed,
                                              double eig_min, double eig_max) {
  const Eigen::Index n = patch.size();
  if (!(gamma > 0.0) || eig_min > eig_max) {
    throw DomainError("make_certified: invalid gamma or eigenvalue range");
  }
  Xoshiro256 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd eig(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eig[i] = eig_min + (eig_max - eig_min) * rng.uniform();
  }
  Eigen::MatrixXd w = q * eig.asDiagonal() * q.transpose();
  w = 0.5 * (w + w.transpose()).eval();
  return LinearDenoiser(std::move(w), Eigen::VectorXd::Zero(n), gamma, patch);
}

void LinearDenoiser::check(const Image& x) const {
  if (x.size() != weight_.rows()) {
    throw ShapeError("LinearDenoiser expects " +
                     std::to_string(weight_.rows()) + " values, got " +
                     std::to_string(x.size()));
  }
}

Image LinearDenoiser::apply(const Image& x, double) const {
  check(x);
  return Image(x.shape(), weight_ * x.values() + offset_);
}

Image LinearDenoiser::jvp(const Image& x, const Image& v, double) const {
  check(x);
  require_same_shape(x, v, "LinearDenoiser::jvp");
  return Image(v.shape(), weight_ * v.values());
}

Image LinearDenoiser::vjp(const Image& x, const Image& v, double) const {
  check(x);
  require_same_shape(x, v, "LinearDenoiser::vjp");
  return Image(v.shape(), weight_.transpose() * v.values());
}

std::unique_ptr<Potential> LinearDenoiser::explicit_potential(
    double t, double beta, double) const {
  if (!(t >= 0.0 && t < 1.0) || !(beta > 0.0)) return nullptr;
  const double asym = (weight_ - weight_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, weight_.cwiseAbs().maxCoeff())) {
    return nullptr;
  }
  const Eigen::Index n = weight_.rows();
  const Eigen::MatrixXd sym = 0.5 * (weight_ + weight_.transpose());
  const Eigen::MatrixXd averaged =
      t * sym + (1.0 - t) * Eigen::MatrixXd::Identity(n, n);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(averaged);
  const Eigen::VectorXd mu = es.eigenvalues();
  if (mu.minCoeff() <= 0.0) return nullptr;
  // D^t(x) = A x + t b with A = averaged. Prox_{F/beta} of
  // F(u) = beta/2 u^T (A^-1 - I) u - beta (A^-1 t b)^T u is exactly that map.
  const Eigen::MatrixXd& q = es.eigenvectors();
  const Eigen::VectorXd inv_minus_one = mu.cwiseInverse().array() - 1.0;
  Eigen::MatrixXd hessian =
      beta * (q * inv_minus_one.asDiagonal() * q.transpose());
  hessian = 0.5 * (hessian + hessian.transpose()).eval();
  const Eigen::VectorXd a_inv_tb =
      q * (mu.cwiseInverse().asDiagonal() * (q.transpose() * (t * offset_)));
  Eigen::VectorXd linear = beta * a_inv_tb;
  const double r = beta * std::max(0.0, -inv_minus_one.minCoeff());
  const double lip = beta * inv_minus_one.cwiseAbs().maxCoeff();
  return std::make_unique<QuadraticPotential>(std::move(hessian),
                                              std::move(linear), r, lip);
}

}  // namespace cocopnp
