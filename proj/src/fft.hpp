#pragma once

#include <complex>
#include <vector>

namespace rfcd::detail {

using Complex = std::complex<double>;

// Unnormalized 2-D DFT on a row-major h x w grid; inverse applies the 1/(h w) factor.
// Plans are cached per thread, so concurrent callers never share buffers.
class Fft2 {
 public:
  static Fft2& get(int height, int width);

  void forward(const double* in, Complex* out);
  void forward(const Complex* in, Complex* out);
  // Writes the real part of the normalized inverse transform.
  void inverse_real(const Complex* in, double* out);

  ~Fft2();
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

 private:
  Fft2(int height, int width);

  int height_;
  int width_;
  void* buffer_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace rfcd::detail
