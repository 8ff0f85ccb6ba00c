#include <cmath>
#include <memory>
#include <sstream>

#include <gtest/gtest.h>

#include "cocopnp/dct_denoiser.hpp"
#include "cocopnp/errors.hpp"
#include "cocopnp/linear_denoiser.hpp"
#include "cocopnp/noise.hpp"
#include "cocopnp/solvers.hpp"
#include "cocopnp/step_theory.hpp"
#include "cocopnp/tiled_denoiser.hpp"
#include "test_support.hpp"

namespace cocopnp {
namespace {

using testing::uniform_image;

Image blur_kernel() {
  Image k({3, 3, 1});
  k.values() << 1, 2, 1, 2, 4, 2, 1, 2, 1;
  k *= 1.0 / 16.0;
  return k;
}

// Block-diagonal certified linear denoiser on 4x4 tiles. Eigenvalues stay
// inside (0,1) so the associated potential is coercive.
std::shared_ptr<const Denoiser> certified_tiled(double gamma, std::uint64_t seed) {
  auto lin = std::make_shared<LinearDenoiser>(
      LinearDenoiser::make_certified({4, 4, 1}, gamma, seed, 0.05, 0.95));
  return std::make_shared<TiledDenoiser>(lin, Shape{4, 4, 1});
}

struct Instance {
  Image clean;
  PoissonFidelity g;
};

Instance deconvolution_16(std::uint64_t seed) {
  const auto k = LinearOperator::convolution(blur_kernel());
  Image clean = uniform_image({16, 16, 1}, seed, 0.2, 0.8);
  Image f = simulate_poisson(clean, {100.0, seed + 1}, k);
  return {clean, PoissonFidelity{f, k, 1.0}};
}

Instance denoising_16(std::uint64_t seed) {
  Image clean = uniform_image({16, 16, 1}, seed, 0.2, 0.8);
  Image f = simulate_poisson(clean, {100.0, seed + 1}, LinearOperator::identity());
  return {clean, PoissonFidelity{f, LinearOperator::identity(), 1.0}};
}

TEST(CocoAdmm, InertDenoiserRecoversObservation) {
  const auto inst = denoising_16(1);
  const auto d = certified_tiled(0.25, 2);
  SolverConfig cfg;
  cfg.gamma = 0.25;
  cfg.t = 0.0;
  cfg.sigma = 0.5;
  cfg.max_iter = 5;
  const auto res = coco_admm(inst.g, *d, cfg);
  EXPECT_LE(res.trace.iterations(), 5);
  EXPECT_LT((res.u - inst.g.f).values().cwiseAbs().maxCoeff(), 1e-8);
}

TEST(CocoAdmm, ZeroFidelityReachesDenoiserFixedPoint) {
  const auto inst = denoising_16(3);
  PoissonFidelity g = inst.g;
  g.lambda = 0.0;
  DctSoftThresholdDenoiser dct(1.0);
  SolverConfig cfg;
  cfg.gamma = 1.0;
  cfg.t = 0.5;
  cfg.sigma = 0.05;
  cfg.max_iter = 5000;
  cfg.stop_tol = 1e-9;
  const auto res = coco_admm(g, dct, cfg);
  ASSERT_TRUE(res.trace.converged);
  EXPECT_LE(norm(averaged_apply(dct, cfg.t, res.u, cfg.sigma) - res.u), 1e-6);
}

TEST(CocoAdmm, DeconvolutionLimitIsStationary) {
  const auto inst = deconvolution_16(4);
  const auto d = certified_tiled(0.25, 5);
  SolverConfig cfg;
  cfg.gamma = 0.25;
  cfg.t = 0.2;
  cfg.sigma = 0.5;
  cfg.max_iter = 5000;
  cfg.stop_tol = 1e-12;
  cfg.inner.T = 50;
  cfg.enforce_theory = true;
  const auto res = coco_admm(inst.g, *d, cfg);
  const double beta = cfg.beta();
  EXPECT_LE(norm(res.u - prox(res.u - res.b, inst.g, beta, cfg.inner)), 1e-6);
  EXPECT_LE(norm(res.u - averaged_apply(*d, cfg.t, res.u + res.b, cfg.sigma)), 1e-6);
}

TEST(CocoAdmm, LyapunovDescentBound) {
  const auto inst = deconvolution_16(6);
  const auto d = certified_tiled(0.25, 7);
  SolverConfig cfg;
  cfg.gamma = 0.25;
  cfg.t = 0.2;
  cfg.sigma = 0.5;
  cfg.max_iter = 150;
  cfg.stop_tol = 1e-14;
  cfg.inner.T = 200;
  const auto res = coco_admm(inst.g, *d, cfg);
  const double beta = cfg.beta();
  const double margin = admm_margin({cfg.gamma, cfg.t, beta});
  ASSERT_GT(margin, 0.0);
  const auto& recs = res.trace.records;
  ASSERT_GE(recs.size(), 100u);
  for (std::size_t k = 1; k < recs.size(); ++k) {
    const double drop = recs[k - 1].lyapunov - recs[k].lyapunov;
    ASSERT_GE(drop, -1e-9) << k;
    ASSERT_GE(drop, 0.5 * beta * recs[k].delta_u * recs[k].delta_u +
                        margin * recs[k].delta_v * recs[k].delta_v - 1e-8)
        << k;
  }
}

TEST(CocoAdmm, DeterministicAndConvergenceFlag) {
  const auto inst = deconvolution_16(8);
  DctSoftThresholdDenoiser dct(1.0);
  SolverConfig cfg;
  cfg.gamma = 1.0;
  cfg.t = 0.5;
  cfg.sigma = 0.1;
  cfg.stop_tol = 1e-4;
  const auto a = coco_admm(inst.g, dct, cfg, inst.clean);
  const auto b = coco_admm(inst.g, dct, cfg, inst.clean);
  EXPECT_EQ(a.u.values(), b.u.values());
  ASSERT_EQ(a.trace.iterations(), b.trace.iterations());
  if (a.trace.converged) {
    EXPECT_LT(a.trace.records.back().rel_change, cfg.stop_tol);
  }
  EXPECT_FALSE(std::isnan(a.trace.records.back().psnr));
  EXPECT_FALSE(std::isnan(a.trace.records.back().lyapunov));
}

TEST(CocoAdmm, ConfigChecks) {
  const auto inst = denoising_16(9);
  const auto d = certified_tiled(0.25, 10);
  SolverConfig cfg;
  cfg.gamma = 0.5;
  EXPECT_THROW(coco_admm(inst.g, *d, cfg), ConfigError);
  cfg.gamma = 0.1;
  cfg.max_iter = 2;
  EXPECT_NO_THROW(coco_admm(inst.g, *d, cfg));
  cfg.max_iter = 200;
  cfg.gamma = 0.25;
  cfg.t = 0.5;
  cfg.enforce_theory = true;
  EXPECT_THROW(coco_admm(inst.g, *d, cfg), ConfigError);
  cfg.t = 1.0;
  cfg.enforce_theory = false;
  EXPECT_THROW(coco_admm(inst.g, *d, cfg), ConfigError);
  cfg.t = 0.2;
  cfg.sigma = 0.0;
  EXPECT_THROW(coco_admm(inst.g, *d, cfg), ConfigError);
  cfg.sigma = 0.1;
  cfg.stop_tol = 0.0;
  EXPECT_THROW(coco_admm(inst.g, *d, cfg), ConfigError);

  class Unclaimed final : public Denoiser {
   public:
    Image apply(const Image& x, double) const override { return x; }
    Image jvp(const Image&, const Image& v, double) const override { return v; }
    Image vjp(const Image&, const Image& v, double) const override { return v; }
    std::string name() const override { return "unclaimed"; }
  } unclaimed;
  SolverConfig strict;
  strict.enforce_theory = true;
  EXPECT_THROW(coco_admm(inst.g, unclaimed, strict), ConfigError);
  strict.enforce_theory = false;
  EXPECT_NO_THROW(coco_admm(inst.g, unclaimed, strict));
}

TEST(CocoAdmm, DecimationStartsFromReplicatedObservation) {
  const auto k = LinearOperator::decimation(2);
  const Image clean = uniform_image({8, 8, 1}, 11, 0.2, 0.8);
  PoissonFidelity g{simulate_poisson(clean, {200.0, 12}, k), k, 1.0};
  const Image u0 = initial_estimate(g);
  EXPECT_EQ(u0.shape(), clean.shape());
  EXPECT_EQ(u0.at(3, 5), g.f.at(1, 2));
  DctSoftThresholdDenoiser dct(1.0);
  SolverConfig cfg;
  cfg.gamma = 1.0;
  cfg.t = 0.5;
  cfg.sigma = 0.1;
  cfg.max_iter = 20;
  const auto res = coco_admm(g, dct, cfg);
  EXPECT_TRUE(res.u.all_finite());
}

TEST(CocoPegd, InertDenoiserRecoversObservation) {
  const auto inst = denoising_16(13);
  const auto d = certified_tiled(0.25, 14);
  SolverConfig cfg;
  cfg.gamma = 0.25;
  cfg.t = 0.0;
  cfg.sigma = 1.0;
  cfg.stop_tol = 1e-10;
  cfg.max_iter = 1000;
  const auto res = coco_pegd(inst.g, *d, cfg);
  EXPECT_LT((res.u - inst.g.f).values().cwiseAbs().maxCoeff(), 1e-6);
}

TEST(CocoPegd, ZeroRelaxationMatchesEnvelopeGradientDescent) {
  // Under blur, u0 = f is not the minimizer, so the iterates move.
  const auto inst = deconvolution_16(15);
  const auto d = certified_tiled(0.25, 16);
  SolverConfig cfg;
  cfg.gamma = 0.25;
  cfg.t = 0.0;
  cfg.sigma = 1.0;
  cfg.beta_override = 2.0;
  cfg.stop_tol = 1e-300;
  const PoissonFidelity& g = inst.g;
  Image u = initial_estimate(g);
  for (int k = 1; k <= 8; ++k) {
    cfg.max_iter = k;
    u = u - 0.5 * moreau_grad(u, g, cfg.inner);
    const auto res = coco_pegd(g, *d, cfg);
    ASSERT_LT((res.u - u).values().cwiseAbs().maxCoeff(), 1e-12) << k;
  }
  EXPECT_GT(norm(u - g.f), 1e-3);
}

TEST(CocoPegd, RepeatedThresholdingReachesFixedPoint) {
  const auto inst = denoising_16(17);
  PoissonFidelity g = inst.g;
  g.lambda = 0.0;
  DctSoftThresholdDenoiser dct(1.0);
  SolverConfig cfg;
  cfg.gamma = 1.0;
  cfg.t = 1.0;
  cfg.sigma = 0.05;
  cfg.max_iter = 2000;
  const auto res = coco_pegd(g, dct, cfg);
  ASSERT_TRUE(res.trace.converged);
  EXPECT_EQ(norm(dct.apply(res.u, cfg.sigma) - res.u), 0.0);
}

TEST(CocoPegd, ObjectiveNonIncreasing) {
  const auto inst = denoising_16(18);
  const auto d = certified_tiled(0.25, 19);
  SolverConfig cfg;
  cfg.gamma = 0.25;
  cfg.t = 0.5;
  cfg.sigma = 0.5;
  cfg.max_iter = 500;
  cfg.stop_tol = 1e-9;
  cfg.enforce_theory = true;
  const auto res = coco_pegd(inst.g, *d, cfg);
  double prev = res.trace.initial_lyapunov;
  ASSERT_FALSE(std::isnan(prev));
  for (const auto& r : res.trace.records) {
    ASSERT_LE(r.lyapunov, prev + 1e-10) << r.iter;
    prev = r.lyapunov;
  }
  const Image next = averaged_apply(
      *d, cfg.t, res.u - cfg.sigma * cfg.sigma * moreau_grad(res.u, inst.g, cfg.inner),
      cfg.sigma);
  EXPECT_LT(norm(next - res.u), 1e-6);
}

TEST(CocoPegd, EnforcedStepBound) {
  const auto inst = denoising_16(20);
  const auto d = certified_tiled(0.25, 21);
  SolverConfig cfg;
  cfg.gamma = 0.25;
  cfg.t = 0.5;
  cfg.sigma = 0.5;
  cfg.enforce_theory = true;
  cfg.beta_override = 0.4;
  EXPECT_THROW(coco_pegd(inst.g, *d, cfg), ConfigError);
  cfg.beta_override = 1.0;
  EXPECT_NO_THROW(coco_pegd(inst.g, *d, cfg));
}

TEST(Lyapunov, CouplingTermsVanish) {
  const auto inst = denoising_16(22);
  const auto d = certified_tiled(0.25, 23);
  const auto f = d->explicit_potential(0.2, 4.0, 0.5);
  ASSERT_TRUE(f);
  const Image u = uniform_image({16, 16, 1}, 24, 0.1, 1.0);
  const Image v = uniform_image({16, 16, 1}, 25, 0.1, 1.0);
  const Image zero({16, 16, 1});
  EXPECT_NEAR(lyapunov_value(u, u, zero, *f, inst.g, 4.0),
              f->value(u) + fidelity_value(inst.g, u), 1e-12);

  struct ZeroPotential final : Potential {
    double value(const Image&) const override { return 0.0; }
    double weak_convexity() const override { return 0.0; }
    double gradient_lipschitz() const override { return 0.0; }
  } zero_f;
  EXPECT_NEAR(lyapunov_value(u, v, zero, zero_f, inst.g, 4.0),
              fidelity_value(inst.g, u) + 2.0 * squared_norm(u - v), 1e-12);
}

TEST(Trace, CsvSchema) {
  const auto inst = denoising_16(26);
  class Plain final : public Denoiser {
   public:
    Image apply(const Image& x, double) const override { return 0.9 * x; }
    Image jvp(const Image&, const Image& v, double) const override { return 0.9 * v; }
    Image vjp(const Image&, const Image& v, double) const override { return 0.9 * v; }
    std::string name() const override { return "plain"; }
  } plain;
  SolverConfig cfg;
  cfg.max_iter = 3;
  const auto res = coco_admm(inst.g, plain, cfg);
  std::ostringstream out;
  write_trace_csv(out, res.trace);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iter,rel_change,psnr,fidelity,lyapunov,millis");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    // psnr and lyapunov absent: two empty fields.
    EXPECT_NE(line.find(",,"), std::string::npos);
  }
  EXPECT_EQ(rows, res.trace.iterations());
}

}  // namespace
}  // namespace cocopnp
