#pragma once

#include <complex>
#include <vector>

namespace cocopnp::detail {

/// Real 2-D FFT of a fixed size. Plans are created once per size and shared;
/// execution uses the new-array interface, which is thread-safe.
class Fft2d {
 public:
  static const Fft2d& get(int height, int width);

  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  int height() const { return height_; }
  int width() const { return width_; }
  /// Number of complex coefficients of the half spectrum.
  int spectrum_size() const { return height_ * (width_ / 2 + 1); }

  std::vector<std::complex<double>> forward(const double* in) const;
  /// Inverse transform including the 1/(h*w) normalization.
  std::vector<double> inverse(std::vector<std::complex<double>> spectrum) const;

 private:
  Fft2d(int height, int width);

  int height_;
  int width_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace cocopnp::detail
