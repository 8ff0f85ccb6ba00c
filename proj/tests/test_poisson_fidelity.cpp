#include <cmath>

#include <gtest/gtest.h>

#include "cocopnp/denoiser.hpp"
#include "cocopnp/errors.hpp"
#include "cocopnp/poisson_fidelity.hpp"
#include "test_support.hpp"

namespace cocopnp {
namespace {

using testing::normal_image;
using testing::uniform_image;

PoissonFidelity identity_fidelity(Image f, double lambda) {
  return {std::move(f), LinearOperator::identity(), lambda};
}

Image blur_kernel() {
  Image k({3, 3, 1});
  k.values() << 1, 2, 1, 2, 4, 2, 1, 2, 1;
  k *= 1.0 / 16.0;
  return k;
}

// Minimizer of lambda (u - f log u) + (beta/2)(u - z)^2 over a grid of
// `n` points on (0, hi].
double grid_prox(double z, double f, double lambda, double beta, double hi,
                 int n) {
  const auto obj = [&](double u) {
    const double data = f > 0.0 ? u - f * std::log(u) : u;
    return lambda * data + 0.5 * beta * (u - z) * (u - z);
  };
  double best = 0.0;
  double best_val = f > 0.0 ? kInfinity : 0.5 * beta * z * z;
  for (int i = 1; i <= n; ++i) {
    const double u = hi * i / n;
    const double v = obj(u);
    if (v < best_val) {
      best_val = v;
      best = u;
    }
  }
  return best;
}

TEST(FidelityValue, Examples) {
  const Image f = uniform_image({4, 4, 1}, 1, 0.1, 2.0);
  const auto g = identity_fidelity(f, 1.0);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    expected += f.values()[i] - f.values()[i] * std::log(f.values()[i]);
  }
  EXPECT_NEAR(fidelity_value(g, f), expected, 1e-12);
  EXPECT_EQ(fidelity_value(identity_fidelity(Image({3, 3, 1}), 1.0), Image({3, 3, 1})), 0.0);
  const Image u = uniform_image({4, 4, 1}, 2, 0.5, 1.0);
  EXPECT_NEAR(fidelity_value(identity_fidelity(f, 2.0), u),
              2.0 * fidelity_value(g, u), 1e-12);
}

TEST(FidelityValue, DomainViolationIsInfinite) {
  Image f({2, 2, 1}, 1.0);
  Image u({2, 2, 1}, 1.0);
  u.at(0, 0) = 0.0;
  EXPECT_EQ(fidelity_value(identity_fidelity(f, 1.0), u), kInfinity);
  u.at(0, 0) = -1.0;
  EXPECT_EQ(fidelity_value(identity_fidelity(Image({2, 2, 1}), 1.0), u), kInfinity);
}

TEST(ProxIdentity, Examples) {
  const auto at = [](double z, double f, double lambda, double beta) {
    return prox_identity(Image({1, 1, 1}, z),
                         identity_fidelity(Image({1, 1, 1}, f), lambda), beta)
        .values()[0];
  };
  EXPECT_NEAR(at(1, 1, 1, 1), 1.0, 1e-15);
  EXPECT_NEAR(at(1, 1, 1, 1), grid_prox(1, 1, 1, 1, 3.0, 100000), 1e-4);
  EXPECT_NEAR(at(2, 0, 1, 1), 1.0, 1e-15);
  EXPECT_NEAR(at(2, 0, 1, 1), grid_prox(2, 0, 1, 1, 3.0, 100000), 1e-4);
  EXPECT_NEAR(at(0, 4, 1, 1), (-1 + std::sqrt(17.0)) / 2, 1e-15);
  EXPECT_NEAR(at(0, 4, 1, 1), grid_prox(0, 4, 1, 1, 3.0, 100000), 1e-4);
  EXPECT_EQ(at(-3, 0, 1, 1), 0.0);
}

TEST(ProxIdentity, BeatsLocalGrid) {
  Xoshiro256 rng(3);
  for (int k = 0; k < 200; ++k) {
    const double z = 4 * rng.uniform() - 1.5;
    const double f = rng.uniform() < 0.2 ? 0.0 : 3 * rng.uniform();
    const double lambda = 0.1 + 2 * rng.uniform();
    const double beta = 0.1 + 5 * rng.uniform();
    const double u = poisson_scalar_prox(z, f, lambda, beta);
    const auto obj = [&](double p) {
      if (f > 0.0 && p <= 0.0) return kInfinity;
      if (p < 0.0) return kInfinity;
      return lambda * (p - (f > 0.0 ? f * std::log(p) : 0.0)) +
             0.5 * beta * (p - z) * (p - z);
    };
    const double at_u = obj(u);
    for (int i = -500; i <= 500; ++i) {
      ASSERT_GE(obj(u + i * 1e-3), at_u - 1e-10);
    }
  }
}

TEST(ProxIdentity, StableForNegativeShift) {
  // beta z - lambda very negative with tiny f: the cancellation-free branch.
  const double u = poisson_scalar_prox(-1e6, 1e-8, 1.0, 1.0);
  EXPECT_GT(u, 0.0);
  EXPECT_NEAR(u, 1e-8 / (1e6 + 1.0), 1e-20);
}

TEST(ProxIdentity, MonotoneInZ) {
  const Image f = uniform_image({8, 8, 1}, 4, 0.0, 2.0);
  const auto g = identity_fidelity(f, 0.7);
  const Image z = normal_image({8, 8, 1}, 5);
  const Image z2 = z + uniform_image({8, 8, 1}, 6);
  const Image a = prox_identity(z, g, 2.0);
  const Image b = prox_identity(z2, g, 2.0);
  EXPECT_TRUE(((b.values() - a.values()).array() >= 0.0).all());
}

TEST(ProxIdentity, RejectsOtherOperators) {
  PoissonFidelity g{Image({4, 4, 1}, 1.0), LinearOperator::convolution(blur_kernel()), 1.0};
  EXPECT_THROW(prox_identity(Image({4, 4, 1}), g, 1.0), DomainError);
  EXPECT_THROW(prox_identity(Image({4, 4, 1}), identity_fidelity(Image({4, 4, 1}), 1.0), 0.0),
               DomainError);
}

TEST(ProxGeneral, IdentityMatchesClosedForm) {
  const Image f = uniform_image({8, 8, 1}, 7, 0.0, 2.0);
  const auto g = identity_fidelity(f, 1.0);
  const Image z = uniform_image({8, 8, 1}, 8, -0.5, 2.0);
  const Image exact = prox_identity(z, g, 1.0);
  EXPECT_LT((prox_general(z, g, 1.0, {}) - exact).values().cwiseAbs().maxCoeff(), 1e-6);
}

// With x0 = z and y0 = Kz, a single step at huge rho is pinned to y0, not the prox.
TEST(ProxGeneral, StiffSingleStepStaysAtStart) {
  const Image f = uniform_image({8, 8, 1}, 7, 0.0, 2.0);
  const auto g = identity_fidelity(f, 1.0);
  const Image z = uniform_image({8, 8, 1}, 8, 0.1, 2.0);
  InnerAdmmConfig stiff;
  stiff.rho = 1e6;
  stiff.T = 1;
  EXPECT_LT((prox_general(z, g, 1.0, stiff) - z).values().cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_GT((prox_identity(z, g, 1.0) - z).values().cwiseAbs().maxCoeff(), 1e-2);
}

TEST(ProxGeneral, YUpdateGoldenRatio) {
  // Stationarity 1 - 1/y + y - 2 = 0 for rho = lambda = f = 1, Kx + w = 2.
  EXPECT_NEAR(poisson_scalar_prox(2.0, 1.0, 1.0, 1.0), (1 + std::sqrt(5.0)) / 2, 1e-15);
}

TEST(ProxGeneral, ZeroLambdaReturnsInput) {
  PoissonFidelity g{Image({8, 8, 1}, 1.0), LinearOperator::convolution(blur_kernel()), 0.0};
  const Image z = normal_image({8, 8, 1}, 9);
  EXPECT_EQ(prox_general(z, g, 1.0, {}).values(), z.values());
}

TEST(ProxGeneral, LimitIndependentOfRho) {
  const auto k = LinearOperator::convolution(blur_kernel());
  const Image x = uniform_image({8, 8, 1}, 10, 0.2, 1.0);
  PoissonFidelity g{k.forward(x) + 0.05 * uniform_image({8, 8, 1}, 11), k, 0.8};
  const Image z = uniform_image({8, 8, 1}, 12);
  InnerAdmmConfig cfg;
  cfg.T = 200;
  cfg.rho = 1.0;
  const Image ref = prox_general(z, g, 2.0, cfg);
  for (double rho : {0.5, 4.0}) {
    cfg.rho = rho;
    EXPECT_LT((prox_general(z, g, 2.0, cfg) - ref).values().cwiseAbs().maxCoeff(), 1e-5)
        << rho;
  }
}

TEST(ProxGeneral, StationaryForConvolutionAndDecimation) {
  const LinearOperator ops[] = {LinearOperator::convolution(blur_kernel()),
                                LinearOperator::decimation(2)};
  for (const auto& k : ops) {
    const Image x = uniform_image({8, 8, 1}, 13, 0.2, 1.0);
    const Image kx = k.forward(x);
    PoissonFidelity g{kx + 0.1 * uniform_image(kx.shape(), 14), k, 0.6};
    const Image z = uniform_image({8, 8, 1}, 15);
    InnerAdmmConfig cfg;
    cfg.T = 2000;
    const double beta = 1.5;
    const Image p = prox_general(z, g, beta, cfg);
    // beta (p - z) + lambda K^T (1 - f / Kp) = 0.
    const Image kp = k.forward(p);
    Image ratio = Image::zeros_like(kp);
    for (Eigen::Index i = 0; i < kp.size(); ++i) {
      ratio.values()[i] = 1.0 - g.f.values()[i] / kp.values()[i];
    }
    const Image residual = beta * (p - z) + g.lambda * k.adjoint(ratio);
    EXPECT_LT(norm(residual), 1e-6) << k.describe();
  }
}

TEST(ProxGeneral, ConjugateGradientFailureIsNumericalError) {
  PoissonFidelity g{Image({4, 4, 1}, 0.5), LinearOperator::decimation(2), 1.0};
  InnerAdmmConfig cfg;
  cfg.cg_max = 0;
  cfg.cg_tol = 1e-30;
  EXPECT_THROW(prox_general(uniform_image({8, 8, 1}, 16), g, 1.0, cfg), NumericalError);
}

TEST(ProxGeneral, RejectsBadConfig) {
  const auto g = identity_fidelity(Image({2, 2, 1}, 1.0), 1.0);
  InnerAdmmConfig cfg;
  cfg.rho = 0.0;
  EXPECT_THROW(prox_general(Image({2, 2, 1}), g, 1.0, cfg), DomainError);
  cfg.rho = 1.0;
  cfg.T = 0;
  EXPECT_THROW(prox_general(Image({2, 2, 1}), g, 1.0, cfg), DomainError);
  EXPECT_THROW(prox_general(Image({2, 3, 1}), g, 1.0, {}), ShapeError);
}

TEST(MoreauGrad, Examples) {
  const auto g = identity_fidelity(Image({1, 1, 1}, 1.0), 1.0);
  EXPECT_NEAR(moreau_grad(Image({1, 1, 1}, 1.0), g, {}).values()[0], 0.0, 1e-15);
  const auto zero = identity_fidelity(uniform_image({4, 4, 1}, 17), 0.0);
  EXPECT_EQ(moreau_grad(normal_image({4, 4, 1}, 18), zero, {}).values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(MoreauGrad, OneLipschitz) {
  const Image f = uniform_image({6, 6, 1}, 19, 0.0, 2.0);
  const auto g = identity_fidelity(f, 0.9);
  for (int k = 0; k < 100; ++k) {
    const Image u = normal_image({6, 6, 1}, 100 + k);
    const Image v = normal_image({6, 6, 1}, 200 + k);
    ASSERT_LE(norm(moreau_grad(u, g, {}) - moreau_grad(v, g, {})), norm(u - v) + 1e-8);
  }
}

TEST(MoreauGrad, MatchesFiniteDifferenceOfEnvelope) {
  const Image f = uniform_image({4, 4, 1}, 20, 0.1, 2.0);
  const auto g = identity_fidelity(f, 1.3);
  const Image u = uniform_image({4, 4, 1}, 21, -0.5, 2.0);
  const Image grad = moreau_grad(u, g, {});
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    Image up = u, dn = u;
    up.values()[i] += h;
    dn.values()[i] -= h;
    const double fd = (moreau_envelope(up, g, {}) - moreau_envelope(dn, g, {})) / (2 * h);
    EXPECT_NEAR(grad.values()[i], fd, 1e-4);
  }
}

TEST(PoissonFidelity, Validate) {
  PoissonFidelity g{Image({2, 2, 1}, 1.0), LinearOperator::identity(), 1.0};
  EXPECT_NO_THROW(g.validate({2, 2, 1}));
  EXPECT_THROW(g.validate({3, 2, 1}), ShapeError);
  g.lambda = -1.0;
  EXPECT_THROW(g.validate({2, 2, 1}), DomainError);
  g.lambda = 1.0;
  g.f.at(0, 0) = -0.5;
  EXPECT_THROW(g.validate({2, 2, 1}), DomainError);
}

}  // namespace
}  // namespace cocopnp
