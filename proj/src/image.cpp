#include "rfcd/image.hpp"

#include <stdexcept>
#include <string>

namespace rfcd {

MultiBandImage::MultiBandImage(int width, int height, int bands)
    : width_(width), height_(height) {
  if (width < 1 || height < 1 || bands < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height) + "x" + std::to_string(bands));
  }
  data_ = Matrix::Zero(bands, static_cast<Eigen::Index>(width) * height);
}

MultiBandImage::MultiBandImage(int width, int height, Matrix data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1 || data_.rows() < 1) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  if (data_.cols() != static_cast<Eigen::Index>(width) * height) {
    throw std::invalid_argument("image data has " + std::to_string(data_.cols()) +
                                " pixel columns, expected " + std::to_string(width * height));
  }
  if (!data_.allFinite()) throw std::invalid_argument("image data contains non-finite values");
}

void require_same_shape(const MultiBandImage& a, const MultiBandImage& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                std::to_string(a.width()) + "x" + std::to_string(a.height()) + "x" +
                                std::to_string(a.band_count()) + " vs " + std::to_string(b.width()) +
                                "x" + std::to_string(b.height()) + "x" +
                                std::to_string(b.band_count()) + ")");
  }
}

MultiBandImage operator+(const MultiBandImage& a, const MultiBandImage& b) {
  require_same_shape(a, b, "image addition");
  return MultiBandImage(a.width(), a.height(), a.data() + b.data());
}

MultiBandImage operator-(const MultiBandImage& a, const MultiBandImage& b) {
  require_same_shape(a, b, "image subtraction");
  return MultiBandImage(a.width(), a.height(), a.data() - b.data());
}

MultiBandImage operator*(double s, const MultiBandImage& a) {
  return MultiBandImage(a.width(), a.height(), s * a.data());
}

}  // namespace rfcd
