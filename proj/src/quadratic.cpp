#include "rfcd/solvers.hpp"

#include "spatial_ridge.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <string>

namespace rfcd {

namespace {

Matrix apply_op(const std::optional<Matrix>& op, const Matrix& X) { return op ? Matrix(*op * X) : X; }

Matrix apply_op_adjoint(const std::optional<Matrix>& op, const Matrix& Y) {
  return op ? Matrix(op->transpose() * Y) : Y;
}

Geometry coarse_geometry(const Geometry& latent, const SpatialDegradation& R) {
  return DegradationModel{std::nullopt, R}.observed_geometry(latent);
}

void validate(const QuadraticProblem& q) {
  const int nb = q.latent.bands;
  const Eigen::Index n = q.latent.pixels();
  for (const auto& f : q.spectral) {
    const Eigen::Index rows = f.op ? f.op->rows() : nb;
    if (f.op && f.op->cols() != nb) throw std::invalid_argument("spectral fit operator has wrong input band count");
    if (f.weights.size() != rows || f.target.rows() != rows || f.target.cols() != n) {
      throw std::invalid_argument("spectral fit target/weights shape mismatch");
    }
    if ((f.weights.array() < 0.0).any()) throw std::invalid_argument("negative fit weight");
  }
  if (q.spatial) {
    const Geometry c = coarse_geometry(q.latent, q.spatial->op);
    if (q.spatial->weights.size() != nb || q.spatial->target.rows() != nb ||
        q.spatial->target.cols() != c.pixels()) {
      throw std::invalid_argument("spatial fit target/weights shape mismatch");
    }
    if ((q.spatial->weights.array() <= 0.0).any()) throw std::invalid_argument("spatial fit weights must be > 0");
  }
  for (const auto& r : q.ridges) {
    if (r.rho < 0.0) throw std::invalid_argument("negative ridge weight");
    if (r.target.rows() != nb || r.target.cols() != n) throw std::invalid_argument("ridge target shape mismatch");
  }
}

}  // namespace

double QuadraticProblem::objective(const MultiBandImage& X) const {
  double value = 0.0;
  for (const auto& f : spectral) {
    const Matrix r = f.target - apply_op(f.op, X.data());
    value += 0.5 * (f.weights.asDiagonal() * r.cwiseProduct(r)).sum();
  }
  if (spatial) {
    const Matrix r = spatial->target - apply_spatial(spatial->op, X).data();
    value += 0.5 * (spatial->weights.asDiagonal() * r.cwiseProduct(r)).sum();
  }
  for (const auto& rt : ridges) value += rt.rho * (X.data() - rt.target).squaredNorm();
  return value;
}

MultiBandImage QuadraticProblem::gradient(const MultiBandImage& X) const {
  Matrix g = Matrix::Zero(X.band_count(), X.pixel_count());
  for (const auto& f : spectral) {
    g -= apply_op_adjoint(f.op, f.weights.asDiagonal() * (f.target - apply_op(f.op, X.data())));
  }
  if (spatial) {
    const Geometry c = coarse_geometry(latent, spatial->op);
    const Matrix r = spatial->weights.asDiagonal() * (spatial->target - apply_spatial(spatial->op, X).data());
    g -= apply_spatial_adjoint(spatial->op, MultiBandImage(c.width, c.height, r)).data();
  }
  for (const auto& rt : ridges) g += 2.0 * rt.rho * (X.data() - rt.target);
  return MultiBandImage(X.width(), X.height(), std::move(g));
}

MultiBandImage solve_quadratic(const QuadraticProblem& q) {
  validate(q);
  const int nb = q.latent.bands;
  Matrix Q = Matrix::Zero(nb, nb);
  Matrix C = Matrix::Zero(nb, q.latent.pixels());
  for (const auto& f : q.spectral) {
    if (f.op) {
      Q += f.op->transpose() * f.weights.asDiagonal() * (*f.op);
    } else {
      Q.diagonal() += f.weights;
    }
    C += apply_op_adjoint(f.op, f.weights.asDiagonal() * f.target);
  }
  for (const auto& rt : q.ridges) {
    Q.diagonal().array() += 2.0 * rt.rho;
    C += 2.0 * rt.rho * rt.target;
  }

  if (!q.spatial) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0) || eig.eigenvalues().minCoeff() <= 1e-13 * top) {
      throw std::invalid_argument("singular normal equations; use lambda > 0 or a full-rank spectral response");
    }
    Eigen::LLT<Matrix> llt(Q);
    return MultiBandImage(q.latent.width, q.latent.height, llt.solve(C));
  }

  // Q X + W_R X G = C with G = R R^T. Substituting X = W_R^{-1/2} U X'' decouples the
  // bands: (sigma_i I + G) x''_i = c''_i, each a single-band spatial ridge problem.
  const auto& sp = *q.spatial;
  const Geometry c = coarse_geometry(q.latent, sp.op);
  C += sp.weights.asDiagonal() *
       apply_spatial_adjoint(sp.op, MultiBandImage(c.width, c.height, sp.target)).data();
  const Vector s = sp.weights.cwiseSqrt().cwiseInverse();
  const Matrix As = s.asDiagonal() * Q * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(As);
  const Matrix& U = eig.eigenvectors();
  const Matrix Cpp = U.transpose() * s.asDiagonal() * C;
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  detail::SpatialRidge ridge(sp.op, q.latent.height, q.latent.width);
  Matrix Xpp(nb, q.latent.pixels());
  for (int i = 0; i < nb; ++i) {
    double sigma = eig.eigenvalues()(i);
    if (sigma <= 1e-13 * scale) sigma = 0.0;
    Xpp.row(i) = ridge.solve(Cpp.row(i).transpose(), 1.0, sigma).transpose();
  }
  return MultiBandImage(q.latent.width, q.latent.height, s.asDiagonal() * U * Xpp);
}

}  // namespace rfcd
