#pragma once

// Randomized small instances checked against the dense oracle. Shared by the unit tests and
// the acceptance binary; every function returns the measured discrepancy and leaves the
// tolerance to the caller.

#include "oracle.hpp"
#include "rfcd/regularization.hpp"
#include "rfcd/scenarios.hpp"
#include "rfcd/solvers.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace cases {

using namespace rfcd;

inline NoiseModel random_noise(int bands, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> v(static_cast<std::size_t>(bands));
  for (auto& x : v) x = u(rng);
  return NoiseModel(v);
}

inline SpectralResponse random_response(int out, int in, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix L(out, in);
  for (Eigen::Index i = 0; i < L.size(); ++i) L.data()[i] = u(rng);
  L = L.array().colwise() / L.rowwise().sum().array();
  return SpectralResponse(L);
}

inline SpatialDegradation random_spatial(int d, std::mt19937_64& rng) {
  return SpatialDegradation{oracle::random_kernel(3, rng), Decimation(d, d)};
}

inline Geometry random_small_grid(std::mt19937_64& rng, int min_side = 4, int max_bands = 4) {
  std::uniform_int_distribution<int> side(min_side / 2, 4), bands(2, max_bands);
  return {2 * side(rng), 2 * side(rng), bands(rng)};
}

// Closed-form solvers versus dense normal equations; relative error of the solution.

inline double ridge_denoise_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Geometry g = random_small_grid(rng);
  const MultiBandImage Y1 = oracle::random_image(g, rng), Y2 = oracle::random_image(g, rng),
                       Xb = oracle::random_image(g, rng);
  const NoiseModel n1 = random_noise(g.bands, rng), n2 = random_noise(g.bands, rng);
  const double lambda = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
  const Matrix I = Matrix::Identity(g.bands * g.pixels(), g.bands * g.pixels());
  const Vector x = oracle::solve_normal(
      {{I, oracle::band_weights(n1.inverse_variances(), g.pixels()), oracle::vec(Y1), 0.5},
       {I, oracle::band_weights(n2.inverse_variances(), g.pixels()), oracle::vec(Y2), 0.5},
       {I, Vector::Ones(I.rows()), oracle::vec(Xb), lambda}});
  return oracle::rel_diff(oracle::vec(solve_ridge_denoise(Y1, Y2, Xb, n1, n2, lambda)), x);
}

inline double spectral_deblur_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Geometry g = random_small_grid(rng);
  const SpectralResponse L1 = random_response(1 + g.bands / 2, g.bands, rng);
  const bool second = seed % 2 == 1;
  const std::optional<SpectralResponse> L2 =
      second ? std::optional<SpectralResponse>(random_response(g.bands - 1, g.bands, rng)) : std::nullopt;
  const int b2 = L2 ? L2->out_bands() : g.bands;
  const MultiBandImage Y1 = oracle::random_image({g.width, g.height, L1.out_bands()}, rng);
  const MultiBandImage Y2 = oracle::random_image({g.width, g.height, b2}, rng);
  const MultiBandImage Xb = oracle::random_image(g, rng);
  const NoiseModel n1 = random_noise(L1.out_bands(), rng), n2 = random_noise(b2, rng);
  const double lambda = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
  const Matrix A2 = L2 ? oracle::band_operator(L2->matrix(), g.pixels())
                       : Matrix(Matrix::Identity(g.bands * g.pixels(), g.bands * g.pixels()));
  const Vector x = oracle::solve_normal(
      {{oracle::band_operator(L1.matrix(), g.pixels()), oracle::band_weights(n1.inverse_variances(), g.pixels()),
        oracle::vec(Y1), 0.5},
       {A2, oracle::band_weights(n2.inverse_variances(), g.pixels()), oracle::vec(Y2), 0.5},
       {Matrix::Identity(A2.cols(), A2.cols()), Vector::Ones(A2.cols()), oracle::vec(Xb), lambda}});
  return oracle::rel_diff(oracle::vec(solve_spectral_deblur(Y1, L1, Y2, Xb, n1, n2, lambda, L2)), x);
}

inline double band_superres_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Geometry g = random_small_grid(rng);
  const SpatialDegradation R = random_spatial(2, rng);
  const Geometry c{g.width / 2, g.height / 2, g.bands};
  const MultiBandImage Y = oracle::random_image(c, rng), Z = oracle::random_image(g, rng);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  Vector w(g.bands), mu(g.bands);
  for (int b = 0; b < g.bands; ++b) {
    w(b) = u(rng);
    mu(b) = u(rng);
  }
  const Vector x = oracle::solve_normal(
      {{oracle::pixel_operator(oracle::spatial_matrix(R, g.width, g.height), g.bands),
        oracle::band_weights(w, c.pixels()), oracle::vec(Y), 1.0},
       {Matrix::Identity(g.bands * g.pixels(), g.bands * g.pixels()), oracle::band_weights(mu, g.pixels()),
        oracle::vec(Z), 1.0}});
  return oracle::rel_diff(oracle::vec(solve_band_superres(Y, R, Z, w, mu)), x);
}

inline double sylvester_fusion_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Geometry g = random_small_grid(rng);
  const DegradationModel m1{std::nullopt, random_spatial(2, rng)};
  const DegradationModel m2{random_response(g.bands - 1, g.bands, rng), std::nullopt};
  const MultiBandImage Y1 = oracle::random_image(m1.observed_geometry(g), rng);
  const MultiBandImage Y2 = oracle::random_image(m2.observed_geometry(g), rng);
  const MultiBandImage Xb = oracle::random_image(g, rng);
  const NoiseModel n1 = random_noise(g.bands, rng), n2 = random_noise(g.bands - 1, rng);
  const double lambda = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
  const Vector x = oracle::solve_normal(
      {{oracle::forward_matrix(m1, g), oracle::band_weights(n1.inverse_variances(), Y1.pixel_count()),
        oracle::vec(Y1), 0.5},
       {oracle::forward_matrix(m2, g), oracle::band_weights(n2.inverse_variances(), g.pixels()), oracle::vec(Y2), 0.5},
       {Matrix::Identity(g.bands * g.pixels(), g.bands * g.pixels()), Vector::Ones(g.bands * g.pixels()),
        oracle::vec(Xb), lambda}});
  return oracle::rel_diff(oracle::vec(solve_sylvester_fusion(Y1, m1, Y2, m2, Xb, n1, n2, lambda)), x);
}

// Degradation models on an 8x8 latent grid producing each scenario; input order as given.
struct ScenarioInstance {
  DegradationModel a;
  DegradationModel b;
  Geometry latent;
  ScenarioPlan plan;
};

inline ScenarioInstance scenario_instance(ScenarioId id, std::mt19937_64& rng, int side = 8, int bands = 4) {
  const Geometry g{side, side, bands};
  auto L = [&](int out) { return std::optional<SpectralResponse>(random_response(out, bands, rng)); };
  auto R = [&](int d) { return std::optional<SpatialDegradation>(random_spatial(d, rng)); };
  DegradationModel a, b;
  switch (id) {
    case ScenarioId::S1: break;
    case ScenarioId::S2: a = {L(2), std::nullopt}; break;
    case ScenarioId::S3: a = {std::nullopt, R(2)}; break;
    case ScenarioId::S4: a = {std::nullopt, R(2)}; b = {L(2), std::nullopt}; break;
    case ScenarioId::S5: a = {L(2), R(2)}; break;
    case ScenarioId::S6: a = {std::nullopt, R(4)}; b = {std::nullopt, R(2)}; break;
    case ScenarioId::S7: a = {L(2), R(4)}; b = {std::nullopt, R(2)}; break;
    case ScenarioId::S8: a = {L(2), std::nullopt}; b = {L(3), std::nullopt}; break;
    case ScenarioId::S9: a = {L(2), R(2)}; b = {L(3), std::nullopt}; break;
    case ScenarioId::S10: a = {L(2), R(4)}; b = {L(3), R(2)}; break;
  }
  ScenarioPlan plan = classify_scenario(a, b, g);
  if (plan.id != id) throw std::logic_error("scenario instance classified as " + to_string(plan.id));
  return {a, b, g, std::move(plan)};
}

struct IterativeCheck {
  double objective_rel = 0.0;  // relative gap to the dense optimum
  double primal = 0.0;
  double dual = 0.0;
  bool converged = false;
  int iterations = 0;
};

inline SolverOptions tight_options() {
  SolverOptions o;
  o.tol = 1e-8;
  o.max_iters = 50000;
  return o;
}

// Fusion step of an ADMM scenario against the dense joint normal equations.
inline IterativeCheck fusion_admm_case(ScenarioId id, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ScenarioInstance s = scenario_instance(id, rng);
  const Geometry& g = s.latent;
  const DegradationModel& m1 = s.plan.model1;
  const DegradationModel& m2 = s.plan.model2;
  const MultiBandImage Y1 = oracle::random_image(m1.observed_geometry(g), rng);
  const MultiBandImage Y2 = oracle::random_image(m2.observed_geometry(g), rng);
  const MultiBandImage Xb = oracle::random_image(g, rng);
  const NoiseModel n1 = random_noise(Y1.band_count(), rng), n2 = random_noise(Y2.band_count(), rng);
  const double lambda = 0.05;
  const Vector x = oracle::solve_normal(
      {{oracle::forward_matrix(m1, g), oracle::band_weights(n1.inverse_variances(), Y1.pixel_count()),
        oracle::vec(Y1), 0.5},
       {oracle::forward_matrix(m2, g), oracle::band_weights(n2.inverse_variances(), Y2.pixel_count()),
        oracle::vec(Y2), 0.5},
       {Matrix::Identity(g.bands * g.pixels(), g.bands * g.pixels()), Vector::Ones(g.bands * g.pixels()),
        oracle::vec(Xb), lambda}});
  const double best = fusion_objective(s.plan, Y1, Y2, Xb, n1, n2, lambda, oracle::unvec(x, g));
  const StepResult r = fusion_step(s.plan, Y1, Y2, Xb, n1, n2, lambda, tight_options(), Xb);
  const double got = fusion_objective(s.plan, Y1, Y2, Xb, n1, n2, lambda, r.x);
  return {oracle::rel_diff(got, best), r.primal_residual, r.dual_residual, r.converged, r.inner_iterations};
}

// Largest column norm of the data-term gradient at dX = 0; gamma above it makes zero optimal.
inline double zero_stationarity_bound(const Matrix& A, const Vector& d, const Vector& t, int bands) {
  const Vector g = 2.0 * A.transpose() * d.asDiagonal() * t;
  double m = 0.0;
  for (Eigen::Index p = 0; p < g.size() / bands; ++p) m = std::max(m, g.segment(p * bands, bands).norm());
  return m;
}

struct CorrectionInstance {
  ScenarioInstance s;
  MultiBandImage Y2;
  MultiBandImage X1;
  NoiseModel n2;
  Matrix A;   // dense model 2
  Vector d;   // dense weights
  Vector t;   // vec of the predicted change
  double bound = 0.0;
};

inline CorrectionInstance correction_instance(ScenarioId id, std::uint64_t seed, bool isotropic = false) {
  std::mt19937_64 rng(seed);
  ScenarioInstance s = scenario_instance(id, rng);
  const Geometry& g = s.latent;
  const DegradationModel& m2 = s.plan.model2;
  MultiBandImage Y2 = oracle::random_image(m2.observed_geometry(g), rng);
  MultiBandImage X1 = oracle::random_image(g, rng);
  NoiseModel n2 = isotropic ? NoiseModel::isotropic(Y2.band_count(), 0.7) : random_noise(Y2.band_count(), rng);
  Matrix A = oracle::forward_matrix(m2, g);
  Vector d = oracle::band_weights(n2.inverse_variances(), Y2.pixel_count());
  Vector t = oracle::vec(predicted_change(Y2, m2, X1));
  const double bound = zero_stationarity_bound(A, d, t, g.bands);
  return {std::move(s), std::move(Y2), std::move(X1), std::move(n2), std::move(A), std::move(d), std::move(t), bound};
}

// Correction step against an accelerated dense proximal-gradient reference.
inline IterativeCheck correction_case(ScenarioId id, std::uint64_t seed, double gamma_fraction = 0.3) {
  const CorrectionInstance c = correction_instance(id, seed);
  const Geometry& g = c.s.latent;
  const double gamma = gamma_fraction * c.bound;
  const Vector x = oracle::dense_l21_minimizer(c.A, c.d, c.t, gamma, g.bands);
  const MultiBandImage dY = predicted_change(c.Y2, c.s.plan.model2, c.X1);
  const double best = correction_objective(c.s.plan, dY, c.n2, gamma, oracle::unvec(x, g));
  const StepResult r = correction_step(c.s.plan, c.Y2, c.X1, c.n2, gamma, tight_options(), MultiBandImage(g));
  const double got = correction_objective(c.s.plan, dY, c.n2, gamma, r.x);
  return {oracle::rel_diff(got, best), r.primal_residual, r.dual_residual, r.converged, r.inner_iterations};
}

}  // namespace cases
