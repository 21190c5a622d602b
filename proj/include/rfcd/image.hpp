#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace rfcd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Raster shape. Pixels are indexed row-major: p = row * width + col.
struct Geometry {
  int width = 1;
  int height = 1;
  int bands = 1;

  int pixels() const { return width * height; }
  bool operator==(const Geometry&) const = default;
};

// Band-major raster: data() is bands x pixels.
class MultiBandImage {
 public:
  MultiBandImage(int width, int height, int bands);
  MultiBandImage(int width, int height, Matrix data);
  explicit MultiBandImage(const Geometry& g) : MultiBandImage(g.width, g.height, g.bands) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int band_count() const { return static_cast<int>(data_.rows()); }
  int pixel_count() const { return width_ * height_; }
  Geometry geometry() const { return {width_, height_, band_count()}; }

  const Matrix& data() const { return data_; }
  Matrix& data() { return data_; }

  double at(int band, int row, int col) const { return data_(band, row * width_ + col); }
  double& at(int band, int row, int col) { return data_(band, row * width_ + col); }

  bool same_shape(const MultiBandImage& other) const { return geometry() == other.geometry(); }
  bool all_finite() const { return data_.allFinite(); }

  std::optional<std::vector<double>> band_centers;

 private:
  int width_;
  int height_;
  Matrix data_;
};

MultiBandImage operator+(const MultiBandImage& a, const MultiBandImage& b);
MultiBandImage operator-(const MultiBandImage& a, const MultiBandImage& b);
MultiBandImage operator*(double s, const MultiBandImage& a);

// Throws std::invalid_argument naming `what` when shapes differ.
void require_same_shape(const MultiBandImage& a, const MultiBandImage& b, const char* what);

}  // namespace rfcd
