#include "rfcd/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>
#include <string>

namespace rfcd {

namespace {

constexpr double kSumTolerance = 1e-12;

std::string dims(int w, int h) { return std::to_string(h) + "x" + std::to_string(w); }

}  // namespace

SpectralResponse::SpectralResponse(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) throw std::invalid_argument("empty spectral response");
  if (matrix_.rows() > matrix_.cols()) {
    throw std::invalid_argument("spectral response has more output bands (" +
                                std::to_string(matrix_.rows()) + ") than input bands (" +
                                std::to_string(matrix_.cols()) + ")");
  }
  if (!matrix_.allFinite() || (matrix_.array() < 0.0).any()) {
    throw std::invalid_argument("spectral response entries must be finite and non-negative");
  }
  normalized_ = true;
  for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
    const double s = matrix_.row(r).sum();
    if (s == 0.0) throw std::invalid_argument("spectral response row " + std::to_string(r) + " is all zero");
    if (std::abs(s - 1.0) > kSumTolerance) normalized_ = false;
  }
}

SpectralResponse SpectralResponse::averaging(const std::vector<std::vector<int>>& groups, int in_bands) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(groups.size()), in_bands);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw std::invalid_argument("empty band group");
    for (int b : groups[g]) {
      if (b < 0 || b >= in_bands) throw std::invalid_argument("band index " + std::to_string(b) + " out of range");
      m(static_cast<Eigen::Index>(g), b) += 1.0 / static_cast<double>(groups[g].size());
    }
  }
  return SpectralResponse(std::move(m));
}

SpectralResponse SpectralResponse::identity(int bands) { return SpectralResponse(Matrix::Identity(bands, bands)); }

BlurKernel::BlurKernel(Matrix taps) : taps_(std::move(taps)) {
  if (taps_.rows() % 2 == 0 || taps_.cols() % 2 == 0) {
    throw std::invalid_argument("blur kernel sides must be odd, got " + dims(int(taps_.cols()), int(taps_.rows())));
  }
  if (!taps_.allFinite()) throw std::invalid_argument("blur kernel has non-finite taps");
  if (std::abs(taps_.sum() - 1.0) > kSumTolerance) throw std::invalid_argument("blur kernel must sum to 1");
  const double scale = taps_.cwiseAbs().maxCoeff();
  if ((taps_ - taps_.reverse()).cwiseAbs().maxCoeff() > kSumTolerance * std::max(1.0, scale)) {
    throw std::invalid_argument("blur kernel must be centrosymmetric");
  }
}

BlurKernel BlurKernel::delta() { return BlurKernel(Matrix::Ones(1, 1)); }

BlurKernel BlurKernel::uniform(int side) {
  return BlurKernel(Matrix::Constant(side, side, 1.0 / (static_cast<double>(side) * side)));
}

Decimation::Decimation(int dr, int dc) : row_factor(dr), col_factor(dc) {
  if (dr < 1 || dc < 1) throw std::invalid_argument("decimation factors must be >= 1");
}

Geometry DegradationModel::observed_geometry(const Geometry& latent) const {
  Geometry g = latent;
  if (spectral) {
    if (spectral->in_bands() != latent.bands) {
      throw std::invalid_argument("spectral response expects " + std::to_string(spectral->in_bands()) +
                                  " bands, latent has " + std::to_string(latent.bands));
    }
    g.bands = spectral->out_bands();
  }
  if (spatial) {
    const auto& d = spatial->decimation;
    if (latent.height % d.row_factor != 0 || latent.width % d.col_factor != 0) {
      throw std::invalid_argument("latent size " + dims(latent.width, latent.height) +
                                  " not divisible by decimation " + dims(d.col_factor, d.row_factor));
    }
    g.height /= d.row_factor;
    g.width /= d.col_factor;
  }
  return g;
}

NoiseModel::NoiseModel(std::vector<double> variances) : band_variances(std::move(variances)) {
  for (double v : band_variances) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("noise variances must be finite and >= 0");
  }
}

NoiseModel NoiseModel::isotropic(int bands, double variance) {
  return NoiseModel(std::vector<double>(static_cast<std::size_t>(bands), variance));
}

Vector NoiseModel::inverse_variances() const {
  Vector w(band_count());
  for (int b = 0; b < band_count(); ++b) {
    if (band_variances[b] <= 0.0) {
      throw std::invalid_argument("band " + std::to_string(b) + " has zero noise variance; solvers need variances > 0");
    }
    w(b) = 1.0 / band_variances[b];
  }
  return w;
}

bool NoiseModel::isotropic() const {
  for (double v : band_variances) {
    if (v != band_variances.front()) return false;
  }
  return true;
}

MultiBandImage apply_spectral(const SpectralResponse& L, const MultiBandImage& X) {
  if (L.in_bands() != X.band_count()) {
    throw std::invalid_argument("spectral response expects " + std::to_string(L.in_bands()) +
                                " bands but image has " + std::to_string(X.band_count()));
  }
  return MultiBandImage(X.width(), X.height(), L.matrix() * X.data());
}

MultiBandImage apply_spectral_adjoint(const SpectralResponse& L, const MultiBandImage& Y) {
  if (L.out_bands() != Y.band_count()) {
    throw std::invalid_argument("spectral adjoint expects " + std::to_string(L.out_bands()) +
                                " bands but image has " + std::to_string(Y.band_count()));
  }
  return MultiBandImage(Y.width(), Y.height(), L.matrix().transpose() * Y.data());
}

MultiBandImage apply_blur(const BlurKernel& B, const MultiBandImage& X) {
  const int h = X.height(), w = X.width();
  if (B.rows() > h || B.cols() > w) {
    throw std::invalid_argument("blur kernel " + dims(B.cols(), B.rows()) + " larger than image " + dims(w, h));
  }
  const int rr = B.rows() / 2, rc = B.cols() / 2;
  const Matrix& k = B.taps();
  MultiBandImage out(w, h, X.band_count());
  // out(i, j) += k(u, v) x(i - u, j - v): each tap adds a cyclically shifted row, split into
  // two contiguous runs.
  std::vector<double> in(static_cast<std::size_t>(h) * w), acc(in.size());
  for (int b = 0; b < X.band_count(); ++b) {
    for (int q = 0; q < h * w; ++q) in[static_cast<std::size_t>(q)] = X.data()(b, q);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int i = 0; i < h; ++i) {
      double* dst = acc.data() + static_cast<std::size_t>(i) * w;
      for (int u = -rr; u <= rr; ++u) {
        const double* src = in.data() + static_cast<std::size_t>(((i - u) % h + h) % h) * w;
        for (int v = -rc; v <= rc; ++v) {
          const double kv = k(u + rr, v + rc);
          const int sv = (v % w + w) % w;  // dst[j] += kv * src[(j - sv) mod w]
          for (int j = sv; j < w; ++j) dst[j] += kv * src[j - sv];
          for (int j = 0; j < sv; ++j) dst[j] += kv * src[j - sv + w];
        }
      }
    }
    for (int q = 0; q < h * w; ++q) out.data()(b, q) = acc[static_cast<std::size_t>(q)];
  }
  return out;
}

MultiBandImage decimate(const Decimation& S, const MultiBandImage& X) {
  if (X.height() % S.row_factor != 0 || X.width() % S.col_factor != 0) {
    throw std::invalid_argument("image " + dims(X.width(), X.height()) + " not divisible by decimation " +
                                dims(S.col_factor, S.row_factor));
  }
  const int oh = X.height() / S.row_factor, ow = X.width() / S.col_factor;
  MultiBandImage out(ow, oh, X.band_count());
  for (int i = 0; i < oh; ++i) {
    for (int j = 0; j < ow; ++j) {
      out.data().col(i * ow + j) = X.data().col((i * S.row_factor) * X.width() + j * S.col_factor);
    }
  }
  return out;
}

MultiBandImage upsample_adjoint(const Decimation& S, const MultiBandImage& Z) {
  const int ow = Z.width() * S.col_factor;
  MultiBandImage out(ow, Z.height() * S.row_factor, Z.band_count());
  for (int i = 0; i < Z.height(); ++i) {
    for (int j = 0; j < Z.width(); ++j) {
      out.data().col((i * S.row_factor) * ow + j * S.col_factor) = Z.data().col(i * Z.width() + j);
    }
  }
  return out;
}

MultiBandImage apply_spatial(const SpatialDegradation& R, const MultiBandImage& X) {
  return decimate(R.decimation, apply_blur(R.blur, X));
}

MultiBandImage apply_spatial_adjoint(const SpatialDegradation& R, const MultiBandImage& Z) {
  return apply_blur(R.blur, upsample_adjoint(R.decimation, Z));
}

MultiBandImage apply_forward(const DegradationModel& model, const MultiBandImage& X) {
  MultiBandImage out = model.spectral ? apply_spectral(*model.spectral, X) : X;
  if (model.spatial) out = apply_spatial(*model.spatial, out);
  return out;
}

MultiBandImage apply_forward_adjoint(const DegradationModel& model, const MultiBandImage& Y) {
  MultiBandImage out = model.spatial ? apply_spatial_adjoint(*model.spatial, Y) : Y;
  if (model.spectral) out = apply_spectral_adjoint(*model.spectral, out);
  return out;
}

MultiBandImage sample_noise(const NoiseModel& noise, const Geometry& shape, std::uint64_t seed) {
  if (noise.band_count() != shape.bands) {
    throw std::invalid_argument("noise model has " + std::to_string(noise.band_count()) +
                                " variances for " + std::to_string(shape.bands) + " bands");
  }
  for (double v : noise.band_variances) {
    if (v < 0.0) throw std::invalid_argument("negative noise variance");
  }
  MultiBandImage out(shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int b = 0; b < shape.bands; ++b) {
    const double sd = std::sqrt(noise.band_variances[b]);
    for (int p = 0; p < shape.pixels(); ++p) out.data()(b, p) = sd * gauss(rng);
  }
  return out;
}

BlurKernel build_gaussian_blur(double sigma, int side) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be > 0");
  if (side < 1 || side % 2 == 0) throw std::invalid_argument("gaussian side must be odd and >= 1");
  const int r = side / 2;
  Matrix taps(side, side);
  for (int u = -r; u <= r; ++u) {
    for (int v = -r; v <= r; ++v) taps(u + r, v + r) = std::exp(-(u * u + v * v) / (2.0 * sigma * sigma));
  }
  taps /= taps.sum();
  // Symmetrize so the taps are exactly centrosymmetric after rounding.
  taps = 0.5 * (taps + Matrix(taps.reverse()));
  taps /= taps.sum();
  return BlurKernel(std::move(taps));
}

BlurKernel default_blur_for_factor(int d) {
  if (d <= 1) return BlurKernel::delta();
  const double sigma = 0.5 * d;
  return build_gaussian_blur(sigma, 2 * static_cast<int>(std::ceil(2.0 * sigma)) + 1);
}

}  // namespace rfcd
