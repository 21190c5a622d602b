#include "rfcd/solvers.hpp"

#include "rfcd/regularization.hpp"

#include "spatial_ridge.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rfcd {

void SolverOptions::validate() const {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  if (!(step_scale > 0.0 && step_scale <= 1.0)) throw std::invalid_argument("step_scale must be in (0, 1]");
}

namespace {

void require_bands(const NoiseModel& n, const MultiBandImage& Y, const char* what) {
  if (n.band_count() != Y.band_count()) {
    throw std::invalid_argument(std::string(what) + ": noise model has " + std::to_string(n.band_count()) +
                                " bands, image has " + std::to_string(Y.band_count()));
  }
}

}  // namespace

MultiBandImage solve_ridge_denoise(const MultiBandImage& Y1, const MultiBandImage& Ytilde2,
                                   const MultiBandImage& Xbar, const NoiseModel& n1, const NoiseModel& n2,
                                   double lambda) {
  require_same_shape(Y1, Ytilde2, "solve_ridge_denoise");
  require_same_shape(Y1, Xbar, "solve_ridge_denoise");
  require_bands(n1, Y1, "solve_ridge_denoise");
  require_bands(n2, Ytilde2, "solve_ridge_denoise");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  const Vector w1 = n1.inverse_variances();
  const Vector w2 = n2.inverse_variances();
  const Vector denom = (w1 + w2).array() + 2.0 * lambda;
  Matrix X = (w1.asDiagonal() * Y1.data() + w2.asDiagonal() * Ytilde2.data() + 2.0 * lambda * Xbar.data());
  X = denom.cwiseInverse().asDiagonal() * X;
  return MultiBandImage(Y1.width(), Y1.height(), std::move(X));
}

MultiBandImage solve_spectral_deblur(const MultiBandImage& Y1, const SpectralResponse& L1,
                                     const MultiBandImage& Ytilde2, const MultiBandImage& Xbar,
                                     const NoiseModel& n1, const NoiseModel& n2, double lambda,
                                     const std::optional<SpectralResponse>& L2) {
  require_bands(n1, Y1, "solve_spectral_deblur");
  require_bands(n2, Ytilde2, "solve_spectral_deblur");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (Y1.band_count() != L1.out_bands() || Xbar.band_count() != L1.in_bands()) {
    throw std::invalid_argument("solve_spectral_deblur: L1 incompatible with Y1 or Xbar");
  }
  const int l2_out = L2 ? L2->out_bands() : L1.in_bands();
  if (Ytilde2.band_count() != l2_out || (L2 && L2->in_bands() != L1.in_bands())) {
    throw std::invalid_argument("solve_spectral_deblur: second response incompatible with Ytilde2");
  }
  if (Y1.width() != Xbar.width() || Y1.height() != Xbar.height() || Ytilde2.width() != Xbar.width() ||
      Ytilde2.height() != Xbar.height()) {
    throw std::invalid_argument("solve_spectral_deblur: spatial sizes differ");
  }
  QuadraticProblem q;
  q.latent = Xbar.geometry();
  q.spectral.push_back({L1.matrix(), n1.inverse_variances(), Y1.data()});
  q.spectral.push_back({L2 ? std::optional<Matrix>(L2->matrix()) : std::nullopt, n2.inverse_variances(),
                        Ytilde2.data()});
  if (lambda > 0.0) q.ridges.push_back({lambda, Xbar.data()});
  return solve_quadratic(q);
}

MultiBandImage solve_band_superres(const MultiBandImage& Y, const SpatialDegradation& R, const MultiBandImage& Z,
                                   double weight, double mu) {
  return solve_band_superres(Y, R, Z, Vector::Constant(Z.band_count(), weight),
                             Vector::Constant(Z.band_count(), mu));
}

MultiBandImage solve_band_superres(const MultiBandImage& Y, const SpatialDegradation& R, const MultiBandImage& Z,
                                   const Vector& weights, const Vector& mus) {
  const Geometry coarse = DegradationModel{std::nullopt, R}.observed_geometry(Z.geometry());
  if (Y.geometry() != coarse) throw std::invalid_argument("solve_band_superres: Y is not the decimated shape of Z");
  if (weights.size() != Z.band_count() || mus.size() != Z.band_count()) {
    throw std::invalid_argument("solve_band_superres: per-band weight count mismatch");
  }
  if ((weights.array() < 0.0).any() || (mus.array() < 0.0).any()) {
    throw std::invalid_argument("solve_band_superres: weights must be >= 0");
  }
  // weight ||y - xBS||^2 + mu ||x - z||^2  <=>  (mu I + weight H D'D H) x = weight H D' y + mu z
  const MultiBandImage back = apply_spatial_adjoint(R, Y);
  const detail::SpatialRidge ridge(R, Z.height(), Z.width());
  MultiBandImage X(Z.geometry());
  for (int b = 0; b < Z.band_count(); ++b) {
    const Vector rhs = weights(b) * back.data().row(b).transpose() + mus(b) * Z.data().row(b).transpose();
    X.data().row(b) = ridge.solve(rhs, weights(b), mus(b)).transpose();
  }
  return X;
}

MultiBandImage solve_sylvester_fusion(const MultiBandImage& Y1, const DegradationModel& model1,
                                      const MultiBandImage& Ytilde2, const DegradationModel& model2,
                                      const MultiBandImage& Xbar, const NoiseModel& n1, const NoiseModel& n2,
                                      double lambda) {
  if (model1.spectral || model2.spatial) {
    throw std::invalid_argument("solve_sylvester_fusion: model1 must be spatial-only and model2 spectral-only");
  }
  if (model1.observed_geometry(Xbar.geometry()) != Y1.geometry() ||
      model2.observed_geometry(Xbar.geometry()) != Ytilde2.geometry()) {
    throw std::invalid_argument("solve_sylvester_fusion: observation shapes inconsistent with models");
  }
  require_bands(n1, Y1, "solve_sylvester_fusion");
  require_bands(n2, Ytilde2, "solve_sylvester_fusion");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  QuadraticProblem q;
  q.latent = Xbar.geometry();
  q.spectral.push_back({model2.spectral ? std::optional<Matrix>(model2.spectral->matrix()) : std::nullopt,
                        n2.inverse_variances(), Ytilde2.data()});
  if (model1.spatial) {
    q.spatial = SpatialFit{*model1.spatial, n1.inverse_variances(), Y1.data()};
  } else {
    q.spectral.push_back({std::nullopt, n1.inverse_variances(), Y1.data()});
  }
  if (lambda > 0.0) q.ridges.push_back({lambda, Xbar.data()});
  return solve_quadratic(q);
}

double power_iteration(const Matrix& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw std::invalid_argument("power_iteration needs a square matrix");
  Vector v = Vector::Ones(A.rows()) / std::sqrt(static_cast<double>(A.rows()));
  double estimate = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vector w = A * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (it > 0 && std::abs(next - estimate) <= 1e-10 * std::abs(next)) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return estimate;
}

double l21_data_objective(const MultiBandImage& dY, const std::optional<SpectralResponse>& L,
                          const NoiseModel& noise, double gamma, const MultiBandImage& dX) {
  const Matrix pred = L ? Matrix(L->matrix() * dX.data()) : dX.data();
  const Matrix r = dY.data() - pred;
  const Vector w = noise.inverse_variances();
  return (w.asDiagonal() * r.cwiseProduct(r)).sum() + gamma * l21_norm(dX);
}

IterativeResult forward_backward_l21(const MultiBandImage& dY, const std::optional<SpectralResponse>& L,
                                     const NoiseModel& noise, double gamma, const SolverOptions& opts,
                                     const MultiBandImage& init) {
  opts.validate();
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  require_bands(noise, dY, "forward_backward_l21");
  const int latent_bands = L ? L->in_bands() : dY.band_count();
  if ((L && L->out_bands() != dY.band_count()) || init.band_count() != latent_bands ||
      init.pixel_count() != dY.pixel_count()) {
    throw std::invalid_argument("forward_backward_l21: operator, data and initial point are inconsistent");
  }
  const Vector w = noise.inverse_variances();
  const Matrix Lm = L ? L->matrix() : Matrix::Identity(latent_bands, latent_bands);
  const Matrix hessian = 2.0 * Lm.transpose() * w.asDiagonal() * Lm;
  const double lipschitz = power_iteration(hessian);
  if (!(lipschitz > 0.0)) throw std::invalid_argument("forward_backward_l21: zero operator");
  double step = opts.step_scale / lipschitz;
  const Matrix Wy = Lm.transpose() * w.asDiagonal() * dY.data();

  IterativeResult res{init, {}, 0, false};
  double f = l21_data_objective(dY, L, noise, gamma, init);
  res.objective_trace.push_back(f);
  for (int it = 1; it <= opts.max_iters; ++it) {
    const Matrix grad = hessian * res.x.data() - 2.0 * Wy;
    MultiBandImage cand(init.width(), init.height(), res.x.data() - step * grad);
    cand = group_soft_threshold(cand, step * gamma);
    const double fc = l21_data_objective(dY, L, noise, gamma, cand);
    res.iterations = it;
    if (fc > f) {
      // A rounding-level rise means we are at the fixed point; a real rise means the
      // Lipschitz estimate was low, so shrink the step and retry from the same point.
      if (fc - f <= 1e-14 * std::abs(f)) {
        res.converged = true;
        break;
      }
      step *= 0.5;
      continue;
    }
    const double change = std::abs(f - fc) / std::max(std::abs(f), std::numeric_limits<double>::min());
    res.x = std::move(cand);
    f = fc;
    res.objective_trace.push_back(f);
    if (change < opts.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace rfcd
