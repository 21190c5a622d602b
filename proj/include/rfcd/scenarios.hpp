#pragma once

#include "rfcd/image.hpp"
#include "rfcd/operators.hpp"
#include "rfcd/solvers.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rfcd {

// Degradation patterns relating the two observations. The number is the scenario index;
// "1" is the image whose degradations stay on the latent estimate X1, "2" the one whose
// degradations are also applied to the change image.
//   S1 none            S2 L1            S3 R1            S4 R1 + L2        S5 L1 R1
//   S6 R1 + R2         S7 L1 R1 + R2    S8 L1 + L2       S9 L1 R1 + L2     S10 L1 R1 + L2 R2
enum class ScenarioId { S1 = 1, S2, S3, S4, S5, S6, S7, S8, S9, S10 };

std::string to_string(ScenarioId id);

// One acquisition as described to the planner.
struct SensorSpec {
  int pitch = 1;                          // ground sampling distance, integer units
  std::vector<std::vector<int>> bands;    // each observed band averages these source bands
  double blur_sigma = 0.0;                // 0 selects 0.5 * decimation factor
  int kernel_side = 0;                    // 0 selects 2 * ceil(2 sigma) + 1
};

struct PatternDecision {
  ScenarioId id;
  bool swapped;  // true when the second input plays role 1
};

// Maps degradation presence (spectral/spatial for inputs a and b) to a scenario and role
// assignment. Band counts and decimation factors break ties in the asymmetric cases:
// S6/S10 put the finer virtual grid on role 2, S8 puts the sensor with more bands on role 2.
PatternDecision classify_pattern(bool spectral_a, bool spatial_a, bool spectral_b, bool spatial_b,
                                 int bands_a = 1, int bands_b = 1, int factor_a = 1, int factor_b = 1);

struct ScenarioPlan {
  ScenarioId id = ScenarioId::S1;
  DegradationModel model1;   // role 1, relative to the latent grid
  DegradationModel model2;   // role 2
  Geometry latent;
  std::optional<std::pair<int, int>> virtual_factors;  // (d1, d2) for S6, S7, S10
  bool swapped = false;
  int latent_pitch = 1;
  std::vector<std::vector<int>> latent_bands;  // source bands merged into each latent band

  const MultiBandImage& role1(const MultiBandImage& first, const MultiBandImage& second) const {
    return swapped ? second : first;
  }
  const MultiBandImage& role2(const MultiBandImage& first, const MultiBandImage& second) const {
    return swapped ? first : second;
  }
};

// Builds the plan for two observed images described by their sensors. The latent grid uses
// the GCD of the pitches; latent bands are the coarsest partition of the source bands that
// both sensors' band groups are unions of.
ScenarioPlan classify_scenario(const SensorSpec& a, const Geometry& observed_a, const SensorSpec& b,
                               const Geometry& observed_b);

// Blur plus decimation for a sensor observed at `factor` latent pixels per side (none when
// factor is 1). Default blur sigma is 0.5 * factor; the kernel is clipped to the grid.
std::optional<SpatialDegradation> sensor_spatial(const SensorSpec& s, int factor, const Geometry& latent);

// Plan from degradation models already expressed against a common latent grid.
ScenarioPlan classify_scenario(const DegradationModel& a, const DegradationModel& b, const Geometry& latent);

// Y2 - L2 dX R2
MultiBandImage corrected_image(const MultiBandImage& Y2, const DegradationModel& model2, const MultiBandImage& dX);
// Y2 - L2 X1 R2
MultiBandImage predicted_change(const MultiBandImage& Y2, const DegradationModel& model2, const MultiBandImage& X1);

// Observations in role order, noise models and prior.
struct FusionData {
  MultiBandImage Y1;
  MultiBandImage Y2;
  NoiseModel n1;
  NoiseModel n2;
  MultiBandImage Xbar;
};

// 0.5||L2^{-1/2}(Ytilde2 - L2 X R2)||^2 + 0.5||L1^{-1/2}(Y1 - L1 X R1)||^2 + lambda ||X - Xbar||^2
double fusion_objective(const ScenarioPlan& plan, const MultiBandImage& Y1, const MultiBandImage& Ytilde2,
                        const MultiBandImage& Xbar, const NoiseModel& n1, const NoiseModel& n2, double lambda,
                        const MultiBandImage& X);

// ||L2^{-1/2}(dYcheck - L2 dX R2)||^2 + gamma ||dX||_{2,1}
double correction_objective(const ScenarioPlan& plan, const MultiBandImage& dYcheck, const NoiseModel& n2,
                            double gamma, const MultiBandImage& dX);

// Joint objective monitored by the alternating minimization. The sparsity term carries
// gamma / 2 so that the correction objective above is exactly twice J restricted to dX.
double am_objective(const ScenarioPlan& plan, const FusionData& data, double lambda, double gamma,
                    const MultiBandImage& X1, const MultiBandImage& dX);

struct StepResult {
  MultiBandImage x;
  bool converged = true;
  int inner_iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool kept_previous = false;  // the safeguard rejected the new iterate
};

// ADMM penalty used by the fusion plans: opts.mu times 0.03 times the mean inverse noise
// variance, so the default sits between the prior and data-fit curvatures. The correction
// plans use opts.mu times 0.05 times the mean inverse variance of role 2.
double effective_mu(const SolverOptions& opts, const NoiseModel& n1, const NoiseModel& n2);

// Minimizes fusion_objective over X. `previous` seeds iterative plans and is returned when the
// new iterate would increase the objective. `duals` (optional, in/out) warm-starts ADMM plans.
StepResult fusion_step(const ScenarioPlan& plan, const MultiBandImage& Y1, const MultiBandImage& Ytilde2,
                       const MultiBandImage& Xbar, const NoiseModel& n1, const NoiseModel& n2, double lambda,
                       const SolverOptions& opts, const MultiBandImage& previous,
                       std::vector<MultiBandImage>* duals = nullptr);

// Minimizes correction_objective over dX for the predicted change of X1.
StepResult correction_step(const ScenarioPlan& plan, const MultiBandImage& Y2, const MultiBandImage& X1,
                           const NoiseModel& n2, double gamma, const SolverOptions& opts,
                           const MultiBandImage& previous, std::vector<MultiBandImage>* duals = nullptr);

struct AmParams {
  double lambda = 0.0;
  double gamma = 0.0;
  int max_outer = 50;
  double outer_tol = 1e-5;
};

struct AmState {
  MultiBandImage X1;
  MultiBandImage dX;  // X2 - X1 in role order (role 2 minus role 1)
  MultiBandImage Xbar;
  std::vector<double> objective_trace;  // J at the start, then after every iteration
  int iteration = 0;
  bool converged = false;
  int inner_nonconverged = 0;
};

// Alternates fusion and correction steps starting from dX = 0 and X1 = crude estimate.
// `first`/`second` are the observations in input order; plan.swapped assigns the roles.
AmState robust_fusion_cd(const MultiBandImage& first, const MultiBandImage& second, const ScenarioPlan& plan,
                         const NoiseModel& noise_first, const NoiseModel& noise_second, const AmParams& params,
                         const SolverOptions& opts);

}  // namespace rfcd
