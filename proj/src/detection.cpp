#include "rfcd/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace rfcd {

std::string describe(const ThresholdRule& rule) {
  if (std::holds_alternative<FixedThreshold>(rule)) return "fixed";
  if (std::holds_alternative<QuantileThreshold>(rule)) return "quantile";
  return "otsu";
}

Vector change_energy(const MultiBandImage& dX) { return dX.data().colwise().norm().transpose(); }

namespace {

double otsu(const Vector& e) {
  const double lo = e.minCoeff(), hi = e.maxCoeff();
  if (!(hi > lo)) return std::nextafter(hi, std::numeric_limits<double>::infinity());
  constexpr int kBins = 256;
  const double width = (hi - lo) / kBins;
  std::vector<double> count(kBins, 0.0), sum(kBins, 0.0);
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const int b = std::min(kBins - 1, static_cast<int>((e(i) - lo) / width));
    count[b] += 1.0;
    sum[b] += e(i);
  }
  const double total = static_cast<double>(e.size());
  const double total_sum = std::accumulate(sum.begin(), sum.end(), 0.0);
  double w0 = 0.0, s0 = 0.0, best = -1.0;
  int first_edge = 1, last_edge = 1;
  // Edge k separates bins [0, k) from [k, 256). Ties over empty bins form a plateau
  // whose middle edge is returned.
  for (int k = 1; k < kBins; ++k) {
    w0 += count[k - 1];
    s0 += sum[k - 1];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = s0 / w0, m1 = (total_sum - s0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best * (1.0 + 1e-12)) {
      best = between;
      first_edge = last_edge = k;
    } else if (between >= best * (1.0 - 1e-12) && last_edge == k - 1) {
      last_edge = k;
    }
  }
  return lo + ((first_edge + last_edge) / 2) * width;
}

double quantile(const Vector& e, double q) {
  std::vector<double> v(e.data(), e.data() + e.size());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + frac * (v[i + 1] - v[i]);
}

int lcm(int a, int b) { return a / std::gcd(a, b) * b; }

// Rows of a sensor's response against the latent bands (identity when absent).
Matrix response_rows(const DegradationModel& m, int latent_bands) {
  return m.spectral ? m.spectral->matrix() : Matrix(Matrix::Identity(latent_bands, latent_bands));
}

// Coefficients c with c' * rows == target, using rows whose supports tile the target's
// support and on which the target is proportional to the row.
std::optional<Vector> express(const Eigen::RowVectorXd& target, const Matrix& rows) {
  const double eps = 1e-9;
  Vector c = Vector::Zero(rows.rows());
  std::vector<bool> covered(static_cast<std::size_t>(target.size()), false);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    bool inside = true, overlap = false;
    for (Eigen::Index t = 0; t < target.size(); ++t) {
      if (rows(r, t) > 0.0) {
        inside = inside && target(t) > 0.0;
        overlap = overlap || covered[static_cast<std::size_t>(t)];
      }
    }
    if (!inside || overlap) continue;
    double coef = -1.0;
    bool proportional = true;
    for (Eigen::Index t = 0; t < target.size(); ++t) {
      if (rows(r, t) > 0.0) {
        const double ratio = target(t) / rows(r, t);
        if (coef < 0.0) coef = ratio;
        proportional = proportional && std::abs(ratio - coef) <= eps * std::max(1.0, coef);
      }
    }
    if (!proportional) continue;
    c(r) = coef;
    for (Eigen::Index t = 0; t < target.size(); ++t) {
      if (rows(r, t) > 0.0) covered[static_cast<std::size_t>(t)] = true;
    }
  }
  for (Eigen::Index t = 0; t < target.size(); ++t) {
    if (target(t) > 0.0 && !covered[static_cast<std::size_t>(t)]) return std::nullopt;
  }
  return c;
}

MultiBandImage degrade_spatially(const MultiBandImage& Y, int fr, int fc) {
  if (fr == 1 && fc == 1) return Y;
  const double sigma = 0.5 * std::max(fr, fc);
  int side = 2 * static_cast<int>(std::ceil(2.0 * sigma)) + 1;
  int limit = std::min(Y.width(), Y.height());
  if (limit % 2 == 0) --limit;
  side = std::min(side, limit);
  return decimate(Decimation(fr, fc), apply_blur(build_gaussian_blur(sigma, side), Y));
}

}  // namespace

ThresholdOutcome threshold_map(const Vector& energy, const ThresholdRule& rule) {
  if (energy.size() == 0) throw std::invalid_argument("threshold_map: empty energy vector");
  double tau = 0.0;
  if (const auto* f = std::get_if<FixedThreshold>(&rule)) {
    tau = f->tau;
  } else if (const auto* q = std::get_if<QuantileThreshold>(&rule)) {
    if (!(q->q > 0.0 && q->q < 1.0)) throw std::invalid_argument("quantile must lie in (0, 1)");
    tau = quantile(energy, q->q);
  } else {
    tau = otsu(energy);
  }
  BinaryMap map(static_cast<std::size_t>(energy.size()));
  for (Eigen::Index i = 0; i < energy.size(); ++i) map[static_cast<std::size_t>(i)] = energy(i) >= tau ? 1 : 0;
  return {tau, std::move(map)};
}

BaselineResult wc_baseline(const MultiBandImage& first, const MultiBandImage& second,
                           const DegradationModel& model_first, const DegradationModel& model_second,
                           const Geometry& latent, const ThresholdRule& rule) {
  if (model_first.observed_geometry(latent) != first.geometry() ||
      model_second.observed_geometry(latent) != second.geometry()) {
    throw std::invalid_argument("wc_baseline: observations inconsistent with their models");
  }
  const Matrix ra = response_rows(model_first, latent.bands);
  const Matrix rb = response_rows(model_second, latent.bands);

  // Shared bands: every response row of either sensor that both sensors can synthesize.
  std::vector<Eigen::RowVectorXd> common;
  std::vector<Vector> ca, cb;
  auto consider = [&](const Eigen::RowVectorXd& row) {
    for (const auto& existing : common) {
      if ((existing - row).cwiseAbs().maxCoeff() <= 1e-12) return;
    }
    auto xa = express(row, ra);
    auto xb = express(row, rb);
    if (!xa || !xb) return;
    common.push_back(row);
    ca.push_back(*xa);
    cb.push_back(*xb);
  };
  for (Eigen::Index r = 0; r < ra.rows(); ++r) consider(ra.row(r));
  for (Eigen::Index r = 0; r < rb.rows(); ++r) consider(rb.row(r));
  if (common.empty()) throw std::invalid_argument("wc_baseline: the sensors share no common spectral band");
  Matrix Ma(static_cast<Eigen::Index>(common.size()), ra.rows());
  Matrix Mb(static_cast<Eigen::Index>(common.size()), rb.rows());
  for (std::size_t i = 0; i < common.size(); ++i) {
    Ma.row(static_cast<Eigen::Index>(i)) = ca[i].transpose();
    Mb.row(static_cast<Eigen::Index>(i)) = cb[i].transpose();
  }

  const Decimation da = model_first.spatial ? model_first.spatial->decimation : Decimation();
  const Decimation db = model_second.spatial ? model_second.spatial->decimation : Decimation();
  const int lr = lcm(da.row_factor, db.row_factor), lc = lcm(da.col_factor, db.col_factor);
  if (latent.height % lr != 0 || latent.width % lc != 0) {
    throw std::invalid_argument("wc_baseline: latent grid not divisible by the common decimation");
  }
  const MultiBandImage a = degrade_spatially(MultiBandImage(first.width(), first.height(), Ma * first.data()),
                                             lr / da.row_factor, lc / da.col_factor);
  const MultiBandImage b = degrade_spatially(MultiBandImage(second.width(), second.height(), Mb * second.data()),
                                             lr / db.row_factor, lc / db.col_factor);

  BaselineResult out{ChangeResult{b - a, Vector(), 0.0, {}, {}},
                     Geometry{latent.width / lc, latent.height / lr, static_cast<int>(common.size())}, lr, lc};
  out.change.energy = change_energy(out.change.dX);
  ThresholdOutcome t = threshold_map(out.change.energy, rule);
  out.change.tau = t.tau;
  out.change.map = std::move(t.map);
  return out;
}

Vector replicate_blocks(const Vector& coarse, int coarse_width, int coarse_height, int row_factor, int col_factor) {
  if (coarse.size() != static_cast<Eigen::Index>(coarse_width) * coarse_height) {
    throw std::invalid_argument("replicate_blocks: size mismatch");
  }
  const int w = coarse_width * col_factor, h = coarse_height * row_factor;
  Vector out(static_cast<Eigen::Index>(w) * h);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) out(i * w + j) = coarse((i / row_factor) * coarse_width + j / col_factor);
  }
  return out;
}

BinaryMap replicate_blocks(const BinaryMap& coarse, int coarse_width, int coarse_height, int row_factor,
                           int col_factor) {
  Vector v(static_cast<Eigen::Index>(coarse.size()));
  for (std::size_t i = 0; i < coarse.size(); ++i) v(static_cast<Eigen::Index>(i)) = coarse[i];
  const Vector r = replicate_blocks(v, coarse_width, coarse_height, row_factor, col_factor);
  BinaryMap out(static_cast<std::size_t>(r.size()));
  for (Eigen::Index i = 0; i < r.size(); ++i) out[static_cast<std::size_t>(i)] = r(i) != 0.0 ? 1 : 0;
  return out;
}

}  // namespace rfcd
