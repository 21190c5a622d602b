#pragma once

#include "rfcd/image.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rfcd {

// Band-mixing matrix L (out_bands x in_bands), non-negative, no zero rows.
class SpectralResponse {
 public:
  explicit SpectralResponse(Matrix matrix);

  // Rows average the listed input bands uniformly.
  static SpectralResponse averaging(const std::vector<std::vector<int>>& groups, int in_bands);
  static SpectralResponse identity(int bands);

  const Matrix& matrix() const { return matrix_; }
  int out_bands() const { return static_cast<int>(matrix_.rows()); }
  int in_bands() const { return static_cast<int>(matrix_.cols()); }
  bool normalized() const { return normalized_; }

 private:
  Matrix matrix_;
  bool normalized_;
};

// Odd-sided, centrosymmetric kernel summing to 1. Applied with cyclic boundaries.
class BlurKernel {
 public:
  explicit BlurKernel(Matrix taps);

  static BlurKernel delta();
  static BlurKernel uniform(int side);

  const Matrix& taps() const { return taps_; }
  int rows() const { return static_cast<int>(taps_.rows()); }
  int cols() const { return static_cast<int>(taps_.cols()); }

 private:
  Matrix taps_;
};

// Keeps pixel (i*dr, j*dc) of every dr x dc block.
struct Decimation {
  int row_factor = 1;
  int col_factor = 1;

  Decimation() = default;
  Decimation(int dr, int dc);
  int factor() const { return row_factor * col_factor; }
  bool operator==(const Decimation&) const = default;
};

// R = B S. Blur and decimation only exist together.
struct SpatialDegradation {
  BlurKernel blur;
  Decimation decimation;
};

struct DegradationModel {
  std::optional<SpectralResponse> spectral;
  std::optional<SpatialDegradation> spatial;

  bool has_spectral() const { return spectral.has_value(); }
  bool has_spatial() const { return spatial.has_value(); }
  // Shape of the observation produced from a latent image of shape `latent`.
  Geometry observed_geometry(const Geometry& latent) const;
};

// Diagonal band covariance; pixel covariance is the identity.
struct NoiseModel {
  std::vector<double> band_variances;

  NoiseModel() = default;
  explicit NoiseModel(std::vector<double> variances);
  static NoiseModel isotropic(int bands, double variance);

  int band_count() const { return static_cast<int>(band_variances.size()); }
  Vector inverse_variances() const;  // throws on any zero variance
  bool isotropic() const;
};

MultiBandImage apply_spectral(const SpectralResponse& L, const MultiBandImage& X);
MultiBandImage apply_spectral_adjoint(const SpectralResponse& L, const MultiBandImage& Y);
MultiBandImage apply_blur(const BlurKernel& B, const MultiBandImage& X);
MultiBandImage decimate(const Decimation& S, const MultiBandImage& X);
MultiBandImage upsample_adjoint(const Decimation& S, const MultiBandImage& Z);

// X R and its adjoint Z R^T = B S^T Z (B is symmetric).
MultiBandImage apply_spatial(const SpatialDegradation& R, const MultiBandImage& X);
MultiBandImage apply_spatial_adjoint(const SpatialDegradation& R, const MultiBandImage& Z);

MultiBandImage apply_forward(const DegradationModel& model, const MultiBandImage& X);
MultiBandImage apply_forward_adjoint(const DegradationModel& model, const MultiBandImage& Y);

MultiBandImage sample_noise(const NoiseModel& noise, const Geometry& shape, std::uint64_t seed);

BlurKernel build_gaussian_blur(double sigma, int side);

// Default simulation blur for decimation factor d: sigma = 0.5 * d, side = 2*ceil(2 sigma) + 1.
BlurKernel default_blur_for_factor(int d);

}  // namespace rfcd
