#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "cocopnp/image.hpp"
#include "cocopnp/rng.hpp"

namespace cocopnp::testing {

inline Image uniform_image(Shape shape, std::uint64_t seed, double lo = 0.0,
                           double hi = 1.0) {
  Xoshiro256 rng(seed);
  Image x(shape);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.values()[i] = lo + (hi - lo) * rng.uniform();
  }
  return x;
}

inline Image normal_image(Shape shape, std::uint64_t seed, double scale = 1.0) {
  Xoshiro256 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Image x(shape);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.values()[i] = normal(rng);
  return x;
}

inline Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::uint64_t seed) {
  Xoshiro256 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline double spectral_norm(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

#ifdef COCOPNP_TEST_TMPDIR
inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir =
      std::filesystem::path(COCOPNP_TEST_TMPDIR) / name;
  std::filesystem::create_directories(dir);
  return dir;
}

#endif

}  // namespace cocopnp::testing
