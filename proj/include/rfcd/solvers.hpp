#pragma once

#include "rfcd/image.hpp"
#include "rfcd/operators.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rfcd {

struct SolverOptions {
  int max_iters = 500;
  double tol = 1e-6;
  double mu = 1.0;
  double step_scale = 0.99;

  void validate() const;
};

// Weighted least-squares problem in X (bands x pixels on the `latent` grid):
//   sum_k 0.5 ||W_k^{1/2} (T_k - L_k X)||^2      spectral fits (L_k absent = identity)
// + 0.5 ||W_R^{1/2} (T_R - X R)||^2              at most one spatial fit
// + sum_j rho_j ||X - Z_j||^2                    ridge terms
// Weights are per output band. Solved exactly: per-pixel Cholesky without a spatial fit,
// otherwise a Sylvester equation diagonalized by a band eigendecomposition and the DFT.
struct SpectralFit {
  std::optional<Matrix> op;
  Vector weights;
  Matrix target;
};

struct SpatialFit {
  SpatialDegradation op;
  Vector weights;
  Matrix target;
};

struct RidgeTerm {
  double rho = 0.0;
  Matrix target;
};

struct QuadraticProblem {
  Geometry latent;
  std::vector<SpectralFit> spectral;
  std::optional<SpatialFit> spatial;
  std::vector<RidgeTerm> ridges;

  double objective(const MultiBandImage& X) const;
  MultiBandImage gradient(const MultiBandImage& X) const;
};

MultiBandImage solve_quadratic(const QuadraticProblem& problem);

// X = (L1^-1 Y1 + L2^-1 Y2 + 2 lambda Xbar) / (L1^-1 + L2^-1 + 2 lambda), band-wise.
MultiBandImage solve_ridge_denoise(const MultiBandImage& Y1, const MultiBandImage& Ytilde2,
                                   const MultiBandImage& Xbar, const NoiseModel& n1, const NoiseModel& n2,
                                   double lambda);

// Per-pixel normal equations (L1' W1 L1 + L2' W2 L2 + 2 lambda I) x = rhs. L2 absent means identity.
MultiBandImage solve_spectral_deblur(const MultiBandImage& Y1, const SpectralResponse& L1,
                                     const MultiBandImage& Ytilde2, const MultiBandImage& Xbar,
                                     const NoiseModel& n1, const NoiseModel& n2, double lambda,
                                     const std::optional<SpectralResponse>& L2 = std::nullopt);

// Minimizes weight ||Y - X B S||^2 + mu ||X - Z||^2 band by band (note: no 1/2 factors).
MultiBandImage solve_band_superres(const MultiBandImage& Y, const SpatialDegradation& R, const MultiBandImage& Z,
                                   double weight, double mu);
MultiBandImage solve_band_superres(const MultiBandImage& Y, const SpatialDegradation& R, const MultiBandImage& Z,
                                   const Vector& weights, const Vector& mus);

// Minimizes 0.5||L2^{-1/2}(Y2 - L X)||^2 + 0.5||L1^{-1/2}(Y1 - X R1)||^2 + lambda||X - Xbar||^2,
// with model1 spatial-only and model2 spectral-only (either may be empty).
MultiBandImage solve_sylvester_fusion(const MultiBandImage& Y1, const DegradationModel& model1,
                                      const MultiBandImage& Ytilde2, const DegradationModel& model2,
                                      const MultiBandImage& Xbar, const NoiseModel& n1, const NoiseModel& n2,
                                      double lambda);

struct IterativeResult {
  MultiBandImage x;
  std::vector<double> objective_trace;  // starts with the objective at the initial point
  int iterations = 0;
  bool converged = false;
};

// ||Lambda^{-1/2}(dY - L dX)||^2 + gamma ||dX||_{2,1}; L absent means identity.
double l21_data_objective(const MultiBandImage& dY, const std::optional<SpectralResponse>& L,
                          const NoiseModel& noise, double gamma, const MultiBandImage& dX);

// Proximal gradient on the objective above with step step_scale / lambda_max(2 L' Lambda^-1 L).
IterativeResult forward_backward_l21(const MultiBandImage& dY, const std::optional<SpectralResponse>& L,
                                     const NoiseModel& noise, double gamma, const SolverOptions& opts,
                                     const MultiBandImage& init);

// Largest eigenvalue of a symmetric PSD matrix by power iteration (50 steps or 1e-10 relative change).
double power_iteration(const Matrix& A);

// Scaled ADMM over x and split variables u_k = A_k x. Each iteration updates x, then every
// u_k, then the duals v_k += A_k x - u_k.
struct AdmmSplit {
  std::string name;
  std::function<MultiBandImage(const MultiBandImage& x)> constrain;
  // argmin_u f_k(u) + mu/2 ||u - target||^2, target = A_k x + v_k
  std::function<MultiBandImage(const MultiBandImage& target)> update;
};

struct AdmmPlan {
  explicit AdmmPlan(MultiBandImage x0) : init(std::move(x0)) {}

  std::vector<AdmmSplit> splits;
  // argmin_x g(x) + mu/2 sum_k ||A_k x - target_k||^2, target_k = u_k - v_k
  std::function<MultiBandImage(std::span<const MultiBandImage> targets)> primal_update;
  std::function<double(const MultiBandImage& x)> objective;
  MultiBandImage init;  // starting x
  // Optional warm start for the scaled duals, one per split.
  std::vector<MultiBandImage> init_duals;
};

struct AdmmResult {
  MultiBandImage x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;  // relative
  double dual_residual = 0.0;    // relative
  std::vector<MultiBandImage> splits;  // final split variables
  std::vector<MultiBandImage> duals;
};

AdmmResult admm_minimize(const AdmmPlan& plan, const SolverOptions& opts);

}  // namespace rfcd
