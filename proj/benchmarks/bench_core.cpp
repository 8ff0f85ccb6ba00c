#include <benchmark/benchmark.h>

#include <random>

#include "cocopnp/dct_denoiser.hpp"
#include "cocopnp/noise.hpp"
#include "cocopnp/poisson_fidelity.hpp"
#include "cocopnp/rng.hpp"
#include "cocopnp/solvers.hpp"
#include "cocopnp/spectral.hpp"

namespace {

using namespace cocopnp;

Image random_image(std::uint32_t side, std::uint64_t seed, double lo, double hi) {
  Xoshiro256 rng(seed);
  Image x({side, side, 1});
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.values()[i] = lo + (hi - lo) * rng.uniform();
  }
  return x;
}

LinearOperator blur() {
  Image k({3, 3, 1});
  k.values() << 1, 2, 1, 2, 4, 2, 1, 2, 1;
  k *= 1.0 / 16.0;
  return LinearOperator::convolution(k);
}

void BM_PowerIteration(benchmark::State& state) {
  const auto n = state.range(0);
  Xoshiro256 rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  const MatrixFreeMap map = MatrixFreeMap::from_matrix(m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(power_iteration(map, 30, 2).value);
  }
  state.SetComplexityN(n * n);
}
BENCHMARK(BM_PowerIteration)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_CocoercivityNormDct(benchmark::State& state) {
  const DctSoftThresholdDenoiser dct(1.0);
  const Image x = random_image(8, 3, 0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cocoercivity_norm(dct, x, 0.1, 1.0, 30, 4).norm_coco);
  }
}
BENCHMARK(BM_CocoercivityNormDct);

void BM_ProxIdentity(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  const PoissonFidelity g{random_image(side, 5, 0.0, 2.0), LinearOperator::identity(), 1.0};
  const Image z = random_image(side, 6, -0.5, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(prox_identity(z, g, 4.0));
  }
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_ProxIdentity)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void BM_ProxGeneralConvolution(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  const auto k = blur();
  const PoissonFidelity g{simulate_poisson(random_image(side, 7, 0.2, 0.8), {50.0, 8}, k),
                          k, 1.0};
  const Image z = random_image(side, 9, 0.0, 1.0);
  InnerAdmmConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(prox_general(z, g, 4.0, cfg));
  }
}
BENCHMARK(BM_ProxGeneralConvolution)->Arg(32)->Arg(64)->Arg(128);

void BM_DctDenoiser(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  const DctSoftThresholdDenoiser dct(1.0);
  const Image x = random_image(side, 10, 0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dct.apply(x, 0.1));
  }
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_DctDenoiser)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void BM_AdmmIteration(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  const auto k = blur();
  const PoissonFidelity g{simulate_poisson(random_image(side, 11, 0.2, 0.8), {50.0, 12}, k),
                          k, 50.0};
  const DctSoftThresholdDenoiser dct(1.0);
  SolverConfig cfg;
  cfg.gamma = 1.0;
  cfg.sigma = 0.2;
  cfg.max_iter = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(coco_admm(g, dct, cfg).u);
  }
}
BENCHMARK(BM_AdmmIteration)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
