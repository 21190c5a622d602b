#include "rfcd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rfcd {

namespace {
constexpr double kTiny = 1e-300;
}

AdmmResult admm_minimize(const AdmmPlan& plan, const SolverOptions& opts) {
  opts.validate();
  if (!plan.primal_update || !plan.objective) throw std::invalid_argument("admm plan needs a primal update and an objective");
  const std::size_t k = plan.splits.size();
  if (!plan.init_duals.empty() && plan.init_duals.size() != k) {
    throw std::invalid_argument("admm plan: one initial dual per split required");
  }

  MultiBandImage x = plan.init;
  std::vector<MultiBandImage> u, v;
  u.reserve(k);
  v.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    u.push_back(plan.splits[i].constrain(x));
    if (plan.init_duals.empty()) {
      v.push_back(MultiBandImage(u.back().geometry()));
    } else {
      require_same_shape(plan.init_duals[i], u.back(), "admm dual warm start");
      v.push_back(plan.init_duals[i]);
    }
  }

  AdmmResult best{x, plan.objective(x), 0, false, 0.0, 0.0, u, v};
  std::vector<MultiBandImage> targets;
  for (int it = 1; it <= opts.max_iters; ++it) {
    targets.clear();
    for (std::size_t i = 0; i < k; ++i) targets.push_back(u[i] - v[i]);
    x = plan.primal_update(targets);

    double primal_sq = 0.0, ax_sq = 0.0, u_sq = 0.0, du_sq = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const MultiBandImage ax = plan.splits[i].constrain(x);
      MultiBandImage next = plan.splits[i].update(ax + v[i]);
      du_sq += (next.data() - u[i].data()).squaredNorm();
      u[i] = std::move(next);
      const Matrix r = ax.data() - u[i].data();
      v[i].data() += r;
      primal_sq += r.squaredNorm();
      ax_sq += ax.data().squaredNorm();
      u_sq += u[i].data().squaredNorm();
    }
    const double scale = std::max({std::sqrt(ax_sq), std::sqrt(u_sq), kTiny});
    const double primal = std::sqrt(primal_sq) / scale;
    const double dual = std::sqrt(du_sq) / std::max(std::sqrt(u_sq), kTiny);
    const double f = plan.objective(x);
    if (f <= best.objective) {
      best.x = x;
      best.objective = f;
    }
    best.iterations = it;
    best.primal_residual = primal;
    best.dual_residual = dual;
    if (k == 0 || std::max(primal, dual) < opts.tol) {
      best.converged = true;
      break;
    }
  }
  best.splits = std::move(u);
  best.duals = std::move(v);
  return best;
}

}  // namespace rfcd
