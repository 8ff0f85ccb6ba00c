#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace cocopnp::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

const Fft2d& Fft2d::get(int height, int width) {
  // The mutex must outlive the cache, so it is constructed first.
  std::lock_guard lock(planner_mutex());
  static std::map<std::pair<int, int>, std::unique_ptr<Fft2d>> cache;
  auto& slot = cache[{height, width}];
  if (!slot) slot.reset(new Fft2d(height, width));
  return *slot;
}

Fft2d::Fft2d(int height, int width) : height_(height), width_(width) {
  std::vector<double> real(static_cast<std::size_t>(height) * width);
  std::vector<std::complex<double>> spec(spectrum_size());
  auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
  forward_plan_ = fftw_plan_dft_r2c_2d(height, width, real.data(), cplx,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  inverse_plan_ = fftw_plan_dft_c2r_2d(height, width, cplx, real.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Fft2d::~Fft2d() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

std::vector<std::complex<double>> Fft2d::forward(const double* in) const {
  std::vector<double> copy(in, in + static_cast<std::size_t>(height_) * width_);
  std::vector<std::complex<double>> out(spectrum_size());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), copy.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> Fft2d::inverse(
    std::vector<std::complex<double>> spectrum) const {
  std::vector<double> out(static_cast<std::size_t>(height_) * width_);
  // c2r overwrites its input, which is why spectrum is taken by value.
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(spectrum.data()),
                       out.data());
  const double scale = 1.0 / (static_cast<double>(height_) * width_);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace cocopnp::detail
