#include "rfcd/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace rfcd {

void SceneSpec::validate() const {
  if (width < 1 || height < 1 || band_count < 1 || region_count < 1) {
    throw std::invalid_argument("scene dimensions and region count must be >= 1");
  }
  if (!(signature_scale > 0.0)) throw std::invalid_argument("signature scale must be > 0");
}

MultiBandImage generate_latent_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> sr(static_cast<std::size_t>(spec.region_count)), sc(sr.size());
  Matrix signatures(spec.band_count, spec.region_count);
  for (int r = 0; r < spec.region_count; ++r) {
    sr[r] = unit(rng) * spec.height;
    sc[r] = unit(rng) * spec.width;
    for (int b = 0; b < spec.band_count; ++b) signatures(b, r) = unit(rng) * spec.signature_scale;
  }
  MultiBandImage X(spec.width, spec.height, spec.band_count);
  for (int i = 0; i < spec.height; ++i) {
    for (int j = 0; j < spec.width; ++j) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int r = 0; r < spec.region_count; ++r) {
        const double d = (i + 0.5 - sr[r]) * (i + 0.5 - sr[r]) + (j + 0.5 - sc[r]) * (j + 0.5 - sc[r]);
        if (d < best_d) {
          best_d = d;
          best = r;
        }
      }
      X.data().col(i * spec.width + j) = signatures.col(best);
    }
  }
  return X;
}

PlantedChange plant_changes(const MultiBandImage& X1, const ChangeSpec& spec, std::uint64_t seed) {
  const int w = X1.width(), h = X1.height(), n = X1.pixel_count();
  if (!(spec.changed_fraction > 0.0 && spec.changed_fraction < 1.0)) {
    throw std::invalid_argument("changed_fraction must lie in (0, 1)");
  }
  if (spec.blob_count < 1) throw std::invalid_argument("blob_count must be >= 1");
  if (spec.changed_fraction * n < 1.0) throw std::invalid_argument("changed_fraction covers less than one pixel");
  const double radius = std::sqrt(spec.changed_fraction * n / (spec.blob_count * std::numbers::pi));
  if (2.0 * radius + 1.0 > std::min(w, h)) {
    throw std::invalid_argument("changed_fraction too large for the blob geometry: disk radius " +
                                std::to_string(radius) + " does not fit the image");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PlantedChange out{X1, BinaryMap(static_cast<std::size_t>(n), 0)};
  std::vector<std::pair<double, double>> centers;
  constexpr int kAttempts = 10000;
  for (int blob = 0; blob < spec.blob_count; ++blob) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      const double ci = radius + unit(rng) * (h - 2.0 * radius);
      const double cj = radius + unit(rng) * (w - 2.0 * radius);
      bool clear = true;
      for (const auto& [pi, pj] : centers) {
        // One pixel of clearance keeps blobs from touching.
        if (std::hypot(ci - pi, cj - pj) < 2.0 * radius + 1.0) clear = false;
      }
      if (!clear) continue;
      centers.emplace_back(ci, cj);
      placed = true;
    }
    if (!placed) throw std::invalid_argument("changed_fraction too large for the blob geometry: cannot place disks");
    Vector direction(X1.band_count());
    do {
      for (int b = 0; b < X1.band_count(); ++b) direction(b) = gauss(rng);
    } while (direction.norm() == 0.0);
    direction *= spec.magnitude / direction.norm();
    const auto [ci, cj] = centers.back();
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        if (std::hypot(i + 0.5 - ci, j + 0.5 - cj) <= radius) {
          out.truth[static_cast<std::size_t>(i * w + j)] = 1;
          out.X2.data().col(i * w + j) += direction;
        }
      }
    }
  }
  return out;
}

MultiBandImage simulate_observation(const MultiBandImage& X, const DegradationModel& model, const NoiseModel& noise,
                                    std::uint64_t seed) {
  const MultiBandImage clean = apply_forward(model, X);
  return clean + sample_noise(noise, clean.geometry(), seed);
}

NoiseModel noise_for_snr(const MultiBandImage& clean, double snr_db) {
  std::vector<double> v(static_cast<std::size_t>(clean.band_count()));
  const double ratio = std::pow(10.0, snr_db / 10.0);
  for (int b = 0; b < clean.band_count(); ++b) {
    v[b] = clean.data().row(b).squaredNorm() / clean.pixel_count() / ratio;
  }
  return NoiseModel(std::move(v));
}

MetricsReport evaluate_map(const BinaryMap& map, const BinaryMap& truth) {
  if (map.size() != truth.size()) {
    throw std::invalid_argument("evaluate: map has " + std::to_string(map.size()) + " pixels, truth has " +
                                std::to_string(truth.size()));
  }
  MetricsReport m;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] && truth[i]) ++m.true_positive;
    if (map[i] && !truth[i]) ++m.false_positive;
    if (!map[i] && !truth[i]) ++m.true_negative;
    if (!map[i] && truth[i]) ++m.false_negative;
  }
  const long detected = m.true_positive + m.false_positive;
  const long actual = m.true_positive + m.false_negative;
  m.precision = detected > 0 ? static_cast<double>(m.true_positive) / detected : 0.0;
  m.recall = actual > 0 ? static_cast<double>(m.true_positive) / actual : 0.0;
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

MetricsReport evaluate_energy(const Vector& energy, double tau, const BinaryMap& truth, bool sweep) {
  if (static_cast<std::size_t>(energy.size()) != truth.size()) {
    throw std::invalid_argument("evaluate: energy has " + std::to_string(energy.size()) + " pixels, truth has " +
                                std::to_string(truth.size()));
  }
  BinaryMap map(truth.size());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = energy(static_cast<Eigen::Index>(i)) >= tau ? 1 : 0;
  MetricsReport m = evaluate_map(map, truth);
  if (!sweep) return m;

  const double positives = static_cast<double>(m.true_positive + m.false_negative);
  const double negatives = static_cast<double>(m.false_positive + m.true_negative);
  std::vector<std::size_t> order(truth.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return energy(static_cast<Eigen::Index>(a)) > energy(static_cast<Eigen::Index>(b));
  });
  m.roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  double tp = 0.0, fp = 0.0, auc = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double value = energy(static_cast<Eigen::Index>(order[k]));
    while (k < order.size() && energy(static_cast<Eigen::Index>(order[k])) == value) {
      (truth[order[k]] ? tp : fp) += 1.0;
      ++k;
    }
    const RocPoint p{value, negatives > 0 ? fp / negatives : 0.0, positives > 0 ? tp / positives : 0.0};
    auc += (p.fpr - m.roc.back().fpr) * (p.tpr + m.roc.back().tpr) / 2.0;
    m.roc.push_back(p);
  }
  m.auc = auc;
  return m;
}

}  // namespace rfcd
