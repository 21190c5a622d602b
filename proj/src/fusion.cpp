#include "rfcd/regularization.hpp"
#include "rfcd/scenarios.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rfcd {

namespace {

// Penalty scales relative to the data-fit weights. Measured on 32x32 S5-S10 instances: the
// fusion plans converge fastest near 0.03 (the prior weight lambda is 1e-3 of the data
// weight, and the geometric mean sits near 0.03); the correction plans near 0.05.
constexpr double kFusionPenaltyScale = 0.03;
constexpr double kCorrectionPenaltyScale = 0.05;

std::optional<Matrix> spectral_matrix(const DegradationModel& m) {
  if (!m.spectral) return std::nullopt;
  return m.spectral->matrix();
}

double weighted_sq(const Matrix& r, const Vector& w) { return (w.asDiagonal() * r.cwiseProduct(r)).sum(); }

StepResult from_admm(const AdmmResult& r) {
  StepResult s{r.x};
  s.converged = r.converged;
  s.inner_iterations = r.iterations;
  s.primal_residual = r.primal_residual;
  s.dual_residual = r.dual_residual;
  return s;
}

void seed_duals(AdmmPlan& plan, std::vector<MultiBandImage>* duals) {
  if (duals && duals->size() == plan.splits.size()) {
    bool ok = true;
    for (std::size_t i = 0; i < duals->size(); ++i) {
      ok = ok && (*duals)[i].same_shape(plan.splits[i].constrain(plan.init));
    }
    if (ok) plan.init_duals = *duals;
  }
}

}  // namespace

double fusion_objective(const ScenarioPlan& plan, const MultiBandImage& Y1, const MultiBandImage& Ytilde2,
                        const MultiBandImage& Xbar, const NoiseModel& n1, const NoiseModel& n2, double lambda,
                        const MultiBandImage& X) {
  const Matrix r2 = Ytilde2.data() - apply_forward(plan.model2, X).data();
  const Matrix r1 = Y1.data() - apply_forward(plan.model1, X).data();
  return 0.5 * weighted_sq(r2, n2.inverse_variances()) + 0.5 * weighted_sq(r1, n1.inverse_variances()) +
         lambda * tikhonov_penalty(X, Xbar);
}

double correction_objective(const ScenarioPlan& plan, const MultiBandImage& dYcheck, const NoiseModel& n2,
                            double gamma, const MultiBandImage& dX) {
  const Matrix r = dYcheck.data() - apply_forward(plan.model2, dX).data();
  return weighted_sq(r, n2.inverse_variances()) + gamma * l21_norm(dX);
}

double am_objective(const ScenarioPlan& plan, const FusionData& data, double lambda, double gamma,
                    const MultiBandImage& X1, const MultiBandImage& dX) {
  const MultiBandImage Yt2 = corrected_image(data.Y2, plan.model2, dX);
  return fusion_objective(plan, data.Y1, Yt2, data.Xbar, data.n1, data.n2, lambda, X1) + 0.5 * gamma * l21_norm(dX);
}

double effective_mu(const SolverOptions& opts, const NoiseModel& n1, const NoiseModel& n2) {
  const Vector w1 = n1.inverse_variances();
  const Vector w2 = n2.inverse_variances();
  const double mean = (w1.sum() + w2.sum()) / static_cast<double>(w1.size() + w2.size());
  return opts.mu * kFusionPenaltyScale * mean;
}

StepResult fusion_step(const ScenarioPlan& plan, const MultiBandImage& Y1, const MultiBandImage& Ytilde2,
                       const MultiBandImage& Xbar, const NoiseModel& n1, const NoiseModel& n2, double lambda,
                       const SolverOptions& opts, const MultiBandImage& previous,
                       std::vector<MultiBandImage>* duals) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (Xbar.geometry() != plan.latent || previous.geometry() != plan.latent) {
    throw std::invalid_argument("fusion_step: prior or previous iterate not on the latent grid");
  }
  if (plan.model1.observed_geometry(plan.latent) != Y1.geometry() ||
      plan.model2.observed_geometry(plan.latent) != Ytilde2.geometry()) {
    throw std::invalid_argument("fusion_step: observations inconsistent with the scenario plan");
  }
  const Vector w1 = n1.inverse_variances();
  const Vector w2 = n2.inverse_variances();
  const int nb = plan.latent.bands;
  const double mu = effective_mu(opts, n1, n2);
  const auto& m1 = plan.model1;
  const auto& m2 = plan.model2;
  auto objective = [&](const MultiBandImage& X) {
    return fusion_objective(plan, Y1, Ytilde2, Xbar, n1, n2, lambda, X);
  };
  auto ridge = [&](std::vector<RidgeTerm>& terms) {
    if (lambda > 0.0) terms.push_back({lambda, Xbar.data()});
  };

  StepResult out{previous};
  AdmmPlan admm(previous);
  admm.objective = objective;
  bool iterative = false;

  switch (plan.id) {
    case ScenarioId::S1:
      out.x = solve_ridge_denoise(Y1, Ytilde2, Xbar, n1, n2, lambda);
      break;
    case ScenarioId::S2:
      out.x = solve_spectral_deblur(Y1, *m1.spectral, Ytilde2, Xbar, n1, n2, lambda);
      break;
    case ScenarioId::S8:
      out.x = solve_spectral_deblur(Y1, *m1.spectral, Ytilde2, Xbar, n1, n2, lambda, m2.spectral);
      break;
    case ScenarioId::S3: {
      // 0.5 W2 ||X - Yt2||^2 + lambda ||X - Xbar||^2 folds into one ridge around Z.
      const Vector mus = (0.5 * w2).array() + lambda;
      const Matrix Z = mus.cwiseInverse().asDiagonal() * (0.5 * w2.asDiagonal() * Ytilde2.data() + lambda * Xbar.data());
      out.x = solve_band_superres(Y1, *m1.spatial, MultiBandImage(plan.latent.width, plan.latent.height, Z),
                                  0.5 * w1, mus);
      break;
    }
    case ScenarioId::S4:
      out.x = solve_sylvester_fusion(Y1, m1, Ytilde2, m2, Xbar, n1, n2, lambda);
      break;
    case ScenarioId::S5: {
      // U = L1 X: U-update is band super-resolution against Y1, X-update a per-pixel solve.
      iterative = true;
      const Matrix L1 = m1.spectral->matrix();
      admm.splits.push_back({"U=L1*X", [L1](const MultiBandImage& x) { return MultiBandImage(x.width(), x.height(), L1 * x.data()); },
                             [&, mu](const MultiBandImage& t) {
                               return solve_band_superres(Y1, *m1.spatial, t, 0.5 * w1,
                                                          Vector::Constant(w1.size(), 0.5 * mu));
                             }});
      admm.primal_update = [&, mu, L1](std::span<const MultiBandImage> t) {
        QuadraticProblem q;
        q.latent = plan.latent;
        q.spectral.push_back({std::nullopt, w2, Ytilde2.data()});
        q.spectral.push_back({L1, Vector::Constant(L1.rows(), mu), t[0].data()});
        ridge(q.ridges);
        return solve_quadratic(q);
      };
      break;
    }
    case ScenarioId::S6: {
      // U = X: both updates are band super-resolutions, the X-update also carries the prior.
      iterative = true;
      admm.splits.push_back({"U=X", [](const MultiBandImage& x) { return x; },
                             [&, mu](const MultiBandImage& t) {
                               return solve_band_superres(Y1, *m1.spatial, t, 0.5 * w1,
                                                          Vector::Constant(nb, 0.5 * mu));
                             }});
      admm.primal_update = [&, mu](std::span<const MultiBandImage> t) {
        QuadraticProblem q;
        q.latent = plan.latent;
        q.spatial = SpatialFit{*m2.spatial, w2, Ytilde2.data()};
        ridge(q.ridges);
        q.ridges.push_back({0.5 * mu, t[0].data()});
        return solve_quadratic(q);
      };
      break;
    }
    case ScenarioId::S7: {
      // U = L1 X: U-update is band super-resolution, X-update a Sylvester solve with R2.
      iterative = true;
      const Matrix L1 = m1.spectral->matrix();
      admm.splits.push_back({"U=L1*X", [L1](const MultiBandImage& x) { return MultiBandImage(x.width(), x.height(), L1 * x.data()); },
                             [&, mu](const MultiBandImage& t) {
                               return solve_band_superres(Y1, *m1.spatial, t, 0.5 * w1,
                                                          Vector::Constant(w1.size(), 0.5 * mu));
                             }});
      admm.primal_update = [&, mu, L1](std::span<const MultiBandImage> t) {
        QuadraticProblem q;
        q.latent = plan.latent;
        q.spatial = SpatialFit{*m2.spatial, w2, Ytilde2.data()};
        q.spectral.push_back({L1, Vector::Constant(L1.rows(), mu), t[0].data()});
        ridge(q.ridges);
        return solve_quadratic(q);
      };
      break;
    }
    case ScenarioId::S9: {
      // U = X R1: U-update is a per-pixel spectral solve on the coarse grid, X-update Sylvester.
      iterative = true;
      const Geometry g1 = DegradationModel{std::nullopt, m1.spatial}.observed_geometry(plan.latent);
      admm.splits.push_back({"U=X*R1", [&](const MultiBandImage& x) { return apply_spatial(*m1.spatial, x); },
                             [&, mu, g1](const MultiBandImage& t) {
                               QuadraticProblem q;
                               q.latent = g1;
                               q.spectral.push_back({m1.spectral->matrix(), w1, Y1.data()});
                               q.ridges.push_back({0.5 * mu, t.data()});
                               return solve_quadratic(q);
                             }});
      admm.primal_update = [&, mu](std::span<const MultiBandImage> t) {
        QuadraticProblem q;
        q.latent = plan.latent;
        q.spectral.push_back({spectral_matrix(m2), w2, Ytilde2.data()});
        q.spatial = SpatialFit{*m1.spatial, Vector::Constant(nb, mu), t[0].data()};
        ridge(q.ridges);
        return solve_quadratic(q);
      };
      break;
    }
    case ScenarioId::S10: {
      // U1 = L1 X (super-resolution against Y1), U2 = X R2 (spectral solve against Yt2).
      iterative = true;
      const Matrix L1 = m1.spectral->matrix();
      const Geometry g2 = DegradationModel{std::nullopt, m2.spatial}.observed_geometry(plan.latent);
      admm.splits.push_back({"U1=L1*X", [L1](const MultiBandImage& x) { return MultiBandImage(x.width(), x.height(), L1 * x.data()); },
                             [&, mu](const MultiBandImage& t) {
                               return solve_band_superres(Y1, *m1.spatial, t, 0.5 * w1,
                                                          Vector::Constant(w1.size(), 0.5 * mu));
                             }});
      admm.splits.push_back({"U2=X*R2", [&](const MultiBandImage& x) { return apply_spatial(*m2.spatial, x); },
                             [&, mu, g2](const MultiBandImage& t) {
                               QuadraticProblem q;
                               q.latent = g2;
                               q.spectral.push_back({m2.spectral->matrix(), w2, Ytilde2.data()});
                               q.ridges.push_back({0.5 * mu, t.data()});
                               return solve_quadratic(q);
                             }});
      admm.primal_update = [&, mu, L1](std::span<const MultiBandImage> t) {
        QuadraticProblem q;
        q.latent = plan.latent;
        q.spectral.push_back({L1, Vector::Constant(L1.rows(), mu), t[0].data()});
        q.spatial = SpatialFit{*m2.spatial, Vector::Constant(nb, mu), t[1].data()};
        ridge(q.ridges);
        return solve_quadratic(q);
      };
      break;
    }
  }

  if (iterative) {
    seed_duals(admm, duals);
    const AdmmResult r = admm_minimize(admm, opts);
    if (duals) *duals = r.duals;
    out = from_admm(r);
  }
  if (objective(out.x) > objective(previous)) {
    out.x = previous;
    out.kept_previous = true;
  }
  return out;
}

StepResult correction_step(const ScenarioPlan& plan, const MultiBandImage& Y2, const MultiBandImage& X1,
                           const NoiseModel& n2, double gamma, const SolverOptions& opts,
                           const MultiBandImage& previous, std::vector<MultiBandImage>* duals) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (previous.geometry() != plan.latent) throw std::invalid_argument("correction_step: previous change image not on the latent grid");
  const MultiBandImage dY = predicted_change(Y2, plan.model2, X1);
  const Vector w2 = n2.inverse_variances();
  const auto& m2 = plan.model2;
  const int nb = plan.latent.bands;
  const double mu = opts.mu * kCorrectionPenaltyScale * w2.mean();
  auto objective = [&](const MultiBandImage& dX) { return correction_objective(plan, dY, n2, gamma, dX); };

  StepResult out{previous};
  switch (plan.id) {
    case ScenarioId::S1:
    case ScenarioId::S2:
    case ScenarioId::S3:
    case ScenarioId::S5:
      if (n2.isotropic()) {
        out.x = group_soft_threshold(dY, gamma * n2.band_variances.front() / 2.0);
        break;
      }
      [[fallthrough]];
    case ScenarioId::S4:
    case ScenarioId::S8:
    case ScenarioId::S9: {
      const IterativeResult r = forward_backward_l21(dY, m2.spectral, n2, gamma, opts, previous);
      out.x = r.x;
      out.converged = r.converged;
      out.inner_iterations = r.iterations;
      break;
    }
    case ScenarioId::S6:
    case ScenarioId::S7:
    case ScenarioId::S10: {
      // W (data split) and Z = dX (sparsity split); the dX-update is quadratic in closed form.
      AdmmPlan admm(previous);
      admm.objective = objective;
      const auto& R2 = *m2.spatial;
      if (plan.id == ScenarioId::S10) {
        const Matrix L2 = m2.spectral->matrix();
        admm.splits.push_back({"W1=L2*dX", [L2](const MultiBandImage& x) { return MultiBandImage(x.width(), x.height(), L2 * x.data()); },
                               [&, mu](const MultiBandImage& t) {
                                 return solve_band_superres(dY, R2, t, w2, Vector::Constant(w2.size(), 0.5 * mu));
                               }});
      } else {
        admm.splits.push_back({"W=dX*R2", [&](const MultiBandImage& x) { return apply_spatial(R2, x); },
                               [&, mu](const MultiBandImage& t) {
                                 const Vector denom = (2.0 * w2).array() + mu;
                                 Matrix u = denom.cwiseInverse().asDiagonal() * (2.0 * w2.asDiagonal() * dY.data() + mu * t.data());
                                 return MultiBandImage(t.width(), t.height(), std::move(u));
                               }});
      }
      admm.splits.push_back({"Z=dX", [](const MultiBandImage& x) { return x; },
                             [gamma, mu](const MultiBandImage& t) { return group_soft_threshold(t, gamma / mu); }});
      if (plan.id == ScenarioId::S10) {
        const Matrix L2 = m2.spectral->matrix();
        admm.primal_update = [&, mu, L2](std::span<const MultiBandImage> t) {
          QuadraticProblem q;
          q.latent = plan.latent;
          q.spectral.push_back({L2, Vector::Constant(L2.rows(), mu), t[0].data()});
          q.ridges.push_back({0.5 * mu, t[1].data()});
          return solve_quadratic(q);
        };
      } else {
        admm.primal_update = [&, mu, nb](std::span<const MultiBandImage> t) {
          return solve_band_superres(t[0], R2, t[1], Vector::Constant(nb, 0.5 * mu), Vector::Constant(nb, 0.5 * mu));
        };
      }
      seed_duals(admm, duals);
      const AdmmResult r = admm_minimize(admm, opts);
      if (duals) *duals = r.duals;
      out = from_admm(r);
      // The sparsity split holds exact zeros; prefer it when it scores at least as well.
      if (objective(r.splits[1]) <= objective(out.x)) out.x = r.splits[1];
      break;
    }
  }
  if (objective(out.x) > objective(previous)) {
    out.x = previous;
    out.kept_previous = true;
  }
  return out;
}

AmState robust_fusion_cd(const MultiBandImage& first, const MultiBandImage& second, const ScenarioPlan& plan,
                         const NoiseModel& noise_first, const NoiseModel& noise_second, const AmParams& params,
                         const SolverOptions& opts) {
  RegularizationParams{params.lambda, params.gamma}.validate();
  opts.validate();
  if (params.max_outer < 1 || !(params.outer_tol > 0.0)) throw std::invalid_argument("invalid outer iteration settings");
  const MultiBandImage& Y1 = plan.role1(first, second);
  const MultiBandImage& Y2 = plan.role2(first, second);
  const NoiseModel& n1 = plan.swapped ? noise_second : noise_first;
  const NoiseModel& n2 = plan.swapped ? noise_first : noise_second;
  if (plan.model1.observed_geometry(plan.latent) != Y1.geometry() ||
      plan.model2.observed_geometry(plan.latent) != Y2.geometry()) {
    throw std::invalid_argument("robust_fusion_cd: observations inconsistent with the scenario plan");
  }

  FusionData data{Y1, Y2, n1, n2, crude_estimate(Y1, plan.model1, plan.latent)};
  AmState state{data.Xbar, MultiBandImage(plan.latent), data.Xbar, {}, 0, false, 0};
  double J = am_objective(plan, data, params.lambda, params.gamma, state.X1, state.dX);
  state.objective_trace.push_back(J);
  std::vector<MultiBandImage> fusion_duals, correction_duals;

  for (int k = 1; k <= params.max_outer; ++k) {
    state.iteration = k;
    std::optional<StepResult> f, c;
    try {
      const MultiBandImage Yt2 = corrected_image(Y2, plan.model2, state.dX);
      f = fusion_step(plan, Y1, Yt2, data.Xbar, n1, n2, params.lambda, opts, state.X1, &fusion_duals);
    } catch (const std::exception& e) {
      throw std::runtime_error("fusion step failed at iteration " + std::to_string(k) + ": " + e.what());
    }
    if (!f->converged) ++state.inner_nonconverged;
    if (am_objective(plan, data, params.lambda, params.gamma, f->x, state.dX) <= J) state.X1 = f->x;

    try {
      c = correction_step(plan, Y2, state.X1, n2, params.gamma, opts, state.dX, &correction_duals);
    } catch (const std::exception& e) {
      throw std::runtime_error("correction step failed at iteration " + std::to_string(k) + ": " + e.what());
    }
    if (!c->converged) ++state.inner_nonconverged;
    const double J_fused = am_objective(plan, data, params.lambda, params.gamma, state.X1, state.dX);
    const double J_new = am_objective(plan, data, params.lambda, params.gamma, state.X1, c->x);
    double next = J_fused;
    if (J_new <= J_fused) {
      state.dX = c->x;
      next = J_new;
    }
    state.objective_trace.push_back(next);
    const double change = std::abs(J - next) / std::max(std::abs(J), std::numeric_limits<double>::min());
    J = next;
    if (change < params.outer_tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

}  // namespace rfcd
