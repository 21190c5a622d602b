#include "spatial_ridge.hpp"

#include "fft.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace rfcd::detail {

SpatialRidge::SpatialRidge(const SpatialDegradation& R, int height, int width)
    : h_(height), w_(width), dr_(R.decimation.row_factor), dc_(R.decimation.col_factor) {
  if (h_ % dr_ != 0 || w_ % dc_ != 0) throw std::invalid_argument("grid not divisible by decimation factors");
  if (R.blur.rows() > h_ || R.blur.cols() > w_) throw std::invalid_argument("blur kernel larger than image");
  hc_ = h_ / dr_;
  wc_ = w_ / dc_;
  const int n = h_ * w_;
  std::vector<double> embedded(static_cast<std::size_t>(n), 0.0);
  const int rr = R.blur.rows() / 2, rc = R.blur.cols() / 2;
  for (int u = -rr; u <= rr; ++u) {
    for (int v = -rc; v <= rc; ++v) {
      embedded[static_cast<std::size_t>(((u % h_ + h_) % h_) * w_ + (v % w_ + w_) % w_)] +=
          R.blur.taps()(u + rr, v + rc);
    }
  }
  std::vector<Complex> spectrum(static_cast<std::size_t>(n));
  Fft2::get(h_, w_).forward(embedded.data(), spectrum.data());
  transfer_.resize(static_cast<std::size_t>(n));
  min_transfer_sq_ = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    transfer_[i] = spectrum[i].real();  // centrosymmetric kernel: real spectrum
    min_transfer_sq_ = std::min(min_transfer_sq_, transfer_[i] * transfer_[i]);
  }
  folded_.assign(static_cast<std::size_t>(hc_) * wc_, 0.0);
  const double inv_d = 1.0 / (static_cast<double>(dr_) * dc_);
  for (int g1 = 0; g1 < hc_; ++g1) {
    for (int g2 = 0; g2 < wc_; ++g2) {
      double acc = 0.0;
      for (int a = 0; a < dr_; ++a) {
        for (int b = 0; b < dc_; ++b) {
          const double t = transfer_[static_cast<std::size_t>((g1 + a * hc_) * w_ + g2 + b * wc_)];
          acc += t * t;
        }
      }
      folded_[static_cast<std::size_t>(g1 * wc_ + g2)] = acc * inv_d;
    }
  }
}

Vector SpatialRidge::blur(const Vector& x) const {
  auto& fft = Fft2::get(h_, w_);
  std::vector<Complex> spec(static_cast<std::size_t>(h_) * w_);
  fft.forward(x.data(), spec.data());
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= transfer_[i];
  Vector out(x.size());
  fft.inverse_real(spec.data(), out.data());
  return out;
}

Vector SpatialRidge::solve(const Vector& rhs, double w, double mu) const {
  const int n = h_ * w_;
  if (rhs.size() != n) throw std::invalid_argument("rhs size does not match grid");
  auto& fine = Fft2::get(h_, w_);
  std::vector<Complex> spec(static_cast<std::size_t>(n));
  if (mu <= 0.0) {
    if (dr_ * dc_ > 1) throw std::invalid_argument("super-resolution with mu = 0 and decimation > 1 is underdetermined");
    if (w <= 0.0 || min_transfer_sq_ <= 1e-12) throw std::invalid_argument("singular deblurring system with mu = 0");
    fine.forward(rhs.data(), spec.data());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] /= w * transfer_[i] * transfer_[i];
    Vector out(n);
    fine.inverse_real(spec.data(), out.data());
    return out;
  }
  if (w == 0.0) return rhs / mu;

  // t = D H rhs
  const Vector hr = blur(rhs);
  Vector t(hc_ * wc_);
  for (int i = 0; i < hc_; ++i) {
    for (int j = 0; j < wc_; ++j) t(i * wc_ + j) = hr((i * dr_) * w_ + j * dc_);
  }
  // s = w (mu I + w D H^2 D^T)^{-1} t on the coarse grid
  auto& coarse = Fft2::get(hc_, wc_);
  std::vector<Complex> cspec(static_cast<std::size_t>(hc_) * wc_);
  coarse.forward(t.data(), cspec.data());
  for (std::size_t i = 0; i < cspec.size(); ++i) cspec[i] *= w / (mu + w * folded_[i]);
  Vector s(hc_ * wc_);
  coarse.inverse_real(cspec.data(), s.data());
  // x = (rhs - H D^T s) / mu
  Vector up = Vector::Zero(n);
  for (int i = 0; i < hc_; ++i) {
    for (int j = 0; j < wc_; ++j) up((i * dr_) * w_ + j * dc_) = s(i * wc_ + j);
  }
  return (rhs - blur(up)) / mu;
}

}  // namespace rfcd::detail
