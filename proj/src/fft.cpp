#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace rfcd::detail {

namespace {
// The FFTW planner is not thread-safe; execution on per-thread plans is.
std::mutex planner_mutex;
}  // namespace

Fft2& Fft2::get(int height, int width) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Fft2>> cache;
  auto& slot = cache[{height, width}];
  if (!slot) slot.reset(new Fft2(height, width));
  return *slot;
}

Fft2::Fft2(int height, int width) : height_(height), width_(width) {
  const std::size_t n = static_cast<std::size_t>(height) * width;
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  buffer_ = buf;
  std::lock_guard<std::mutex> lock(planner_mutex);
  forward_plan_ = fftw_plan_dft_2d(height, width, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_2d(height, width, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft2::~Fft2() {
  std::lock_guard<std::mutex> lock(planner_mutex);
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(buffer_);
}

void Fft2::forward(const double* in, Complex* out) {
  const std::size_t n = static_cast<std::size_t>(height_) * width_;
  auto* buf = static_cast<fftw_complex*>(buffer_);
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = in[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  std::memcpy(static_cast<void*>(out), buf, sizeof(fftw_complex) * n);
}

void Fft2::forward(const Complex* in, Complex* out) {
  const std::size_t n = static_cast<std::size_t>(height_) * width_;
  std::memcpy(buffer_, static_cast<const void*>(in), sizeof(fftw_complex) * n);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  std::memcpy(static_cast<void*>(out), buffer_, sizeof(fftw_complex) * n);
}

void Fft2::inverse_real(const Complex* in, double* out) {
  const std::size_t n = static_cast<std::size_t>(height_) * width_;
  auto* buf = static_cast<fftw_complex*>(buffer_);
  std::memcpy(static_cast<void*>(buf), static_cast<const void*>(in), sizeof(fftw_complex) * n);
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i][0] * scale;
}

}  // namespace rfcd::detail
