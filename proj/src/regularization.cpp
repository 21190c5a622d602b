#include "rfcd/regularization.hpp"

#include <cmath>
#include <stdexcept>

namespace rfcd {

void RegularizationParams::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw std::invalid_argument("lambda must be finite and >= 0");
  if (!std::isfinite(gamma) || gamma < 0.0) throw std::invalid_argument("gamma must be finite and >= 0");
}

double l21_norm(const MultiBandImage& D) { return D.data().colwise().norm().sum(); }

MultiBandImage group_soft_threshold(const MultiBandImage& A, double kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
  MultiBandImage out = A;
  if (kappa == 0.0) return out;
  for (Eigen::Index p = 0; p < out.data().cols(); ++p) {
    const double norm = out.data().col(p).norm();
    if (norm <= kappa) {
      out.data().col(p).setZero();
    } else {
      out.data().col(p) *= 1.0 - kappa / norm;
    }
  }
  return out;
}

double tikhonov_penalty(const MultiBandImage& X, const MultiBandImage& Xbar) {
  require_same_shape(X, Xbar, "tikhonov_penalty");
  return (X.data() - Xbar.data()).squaredNorm();
}

MultiBandImage crude_estimate(const MultiBandImage& Y1, const DegradationModel& model1, const Geometry& target) {
  if (model1.observed_geometry(target) != Y1.geometry()) {
    throw std::invalid_argument("crude_estimate: target geometry inconsistent with the observation and its model");
  }
  Matrix spectral = Y1.data();
  if (model1.spectral) {
    const Matrix& L = model1.spectral->matrix();
    const Matrix gram = L * L.transpose();
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw std::invalid_argument("crude_estimate: spectral response is rank deficient");
    }
    spectral = L.transpose() * ldlt.solve(Y1.data());
  }
  MultiBandImage out(target);
  const int dr = model1.spatial ? model1.spatial->decimation.row_factor : 1;
  const int dc = model1.spatial ? model1.spatial->decimation.col_factor : 1;
  for (int i = 0; i < target.height; ++i) {
    for (int j = 0; j < target.width; ++j) {
      out.data().col(i * target.width + j) = spectral.col((i / dr) * Y1.width() + j / dc);
    }
  }
  return out;
}

}  // namespace rfcd
