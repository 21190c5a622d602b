#include "rfcd/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace rfcd {

std::string to_string(ScenarioId id) { return "S" + std::to_string(static_cast<int>(id)); }

PatternDecision classify_pattern(bool spectral_a, bool spatial_a, bool spectral_b, bool spatial_b, int bands_a,
                                 int bands_b, int factor_a, int factor_b) {
  const int nl = int(spectral_a) + int(spectral_b);
  const int nr = int(spatial_a) + int(spatial_b);
  switch (nl * 3 + nr) {
    case 0: return {ScenarioId::S1, false};
    case 1: return {ScenarioId::S3, spatial_b};
    case 2: return {ScenarioId::S6, factor_a < factor_b};
    case 3: return {ScenarioId::S2, spectral_b};
    case 4:
      if (spectral_a == spatial_a) return {ScenarioId::S5, spectral_b};
      return {ScenarioId::S4, spatial_b};
    case 5: return {ScenarioId::S7, spectral_b};
    case 6: return {ScenarioId::S8, bands_a > bands_b};
    case 7: return {ScenarioId::S9, spatial_b};
    default:
      if (factor_a != factor_b) return {ScenarioId::S10, factor_a < factor_b};
      return {ScenarioId::S10, bands_a > bands_b};
  }
}

namespace {

int decimation_factor(const DegradationModel& m) { return m.spatial ? m.spatial->decimation.factor() : 1; }

bool has_virtual_grid(ScenarioId id) {
  return id == ScenarioId::S6 || id == ScenarioId::S7 || id == ScenarioId::S10;
}

ScenarioPlan assemble(const DegradationModel& a, const DegradationModel& b, const Geometry& latent) {
  const Geometry ga = a.observed_geometry(latent);
  const Geometry gb = b.observed_geometry(latent);
  const PatternDecision d = classify_pattern(a.has_spectral(), a.has_spatial(), b.has_spectral(), b.has_spatial(),
                                             ga.bands, gb.bands, decimation_factor(a), decimation_factor(b));
  ScenarioPlan plan;
  plan.id = d.id;
  plan.swapped = d.swapped;
  plan.model1 = d.swapped ? b : a;
  plan.model2 = d.swapped ? a : b;
  plan.latent = latent;
  if (has_virtual_grid(d.id)) {
    plan.virtual_factors = std::make_pair(plan.model1.spatial->decimation.row_factor,
                                          plan.model2.spatial->decimation.row_factor);
  }
  return plan;
}

}  // namespace

std::optional<SpatialDegradation> sensor_spatial(const SensorSpec& s, int d, const Geometry& latent) {
  if (d == 1) return std::nullopt;
  const double sigma = s.blur_sigma > 0.0 ? s.blur_sigma : 0.5 * d;
  int side = s.kernel_side > 0 ? s.kernel_side : 2 * static_cast<int>(std::ceil(2.0 * sigma)) + 1;
  int limit = std::min(latent.width, latent.height);
  if (limit % 2 == 0) --limit;
  if (s.kernel_side > 0 && side > limit) throw std::invalid_argument("kernel side larger than the latent grid");
  side = std::min(side, limit);
  return SpatialDegradation{build_gaussian_blur(sigma, side), Decimation(d, d)};
}

ScenarioPlan classify_scenario(const DegradationModel& a, const DegradationModel& b, const Geometry& latent) {
  return assemble(a, b, latent);
}

ScenarioPlan classify_scenario(const SensorSpec& a, const Geometry& observed_a, const SensorSpec& b,
                               const Geometry& observed_b) {
  if (a.pitch <= 0 || b.pitch <= 0) throw std::invalid_argument("sensor pitches must be positive");
  if (a.bands.empty() || b.bands.empty()) throw std::invalid_argument("each sensor needs at least one band");
  if (static_cast<int>(a.bands.size()) != observed_a.bands || static_cast<int>(b.bands.size()) != observed_b.bands) {
    throw std::invalid_argument("band group count does not match the observed band count");
  }

  // Latent bands: source bands grouped by which observed bands contain them.
  std::map<int, std::vector<int>> membership;
  auto collect = [&](const SensorSpec& s, int offset) {
    for (std::size_t g = 0; g < s.bands.size(); ++g) {
      if (s.bands[g].empty()) throw std::invalid_argument("empty band group");
      std::set<int> seen;
      for (int src : s.bands[g]) {
        if (src < 0) throw std::invalid_argument("negative source band index");
        if (!seen.insert(src).second) throw std::invalid_argument("duplicate source band in a group");
        membership[src].push_back(offset + static_cast<int>(g));
      }
    }
  };
  collect(a, 0);
  collect(b, static_cast<int>(a.bands.size()));
  std::map<std::vector<int>, std::vector<int>> atoms_by_signature;
  for (auto& [src, sig] : membership) {
    std::sort(sig.begin(), sig.end());
    atoms_by_signature[sig].push_back(src);
  }
  std::vector<std::vector<int>> atoms;
  for (auto& [sig, srcs] : atoms_by_signature) atoms.push_back(srcs);
  std::sort(atoms.begin(), atoms.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  const int nl = static_cast<int>(atoms.size());

  auto response = [&](const SensorSpec& s) -> std::optional<SpectralResponse> {
    Matrix L = Matrix::Zero(static_cast<Eigen::Index>(s.bands.size()), nl);
    for (std::size_t g = 0; g < s.bands.size(); ++g) {
      const std::set<int> group(s.bands[g].begin(), s.bands[g].end());
      for (int t = 0; t < nl; ++t) {
        if (group.count(atoms[t].front())) {
          L(static_cast<Eigen::Index>(g), t) = static_cast<double>(atoms[t].size()) / static_cast<double>(group.size());
        }
      }
    }
    if (L.rows() == nl && L.isIdentity(0.0)) return std::nullopt;
    return SpectralResponse(std::move(L));
  };

  const int g = std::gcd(a.pitch, b.pitch);
  const int da = a.pitch / g, db = b.pitch / g;
  Geometry latent{observed_a.width * da, observed_a.height * da, nl};
  if (observed_b.width * db != latent.width || observed_b.height * db != latent.height) {
    throw std::invalid_argument("observed images do not cover the same extent: " + std::to_string(observed_a.width) +
                                "x" + std::to_string(observed_a.height) + " at pitch " + std::to_string(a.pitch) +
                                " vs " + std::to_string(observed_b.width) + "x" + std::to_string(observed_b.height) +
                                " at pitch " + std::to_string(b.pitch));
  }
  const DegradationModel ma{response(a), sensor_spatial(a, da, latent)};
  const DegradationModel mb{response(b), sensor_spatial(b, db, latent)};
  ScenarioPlan plan = assemble(ma, mb, latent);
  plan.latent_pitch = g;
  plan.latent_bands = atoms;
  return plan;
}

MultiBandImage corrected_image(const MultiBandImage& Y2, const DegradationModel& model2, const MultiBandImage& dX) {
  const MultiBandImage degraded = apply_forward(model2, dX);
  require_same_shape(Y2, degraded, "corrected_image");
  return Y2 - degraded;
}

MultiBandImage predicted_change(const MultiBandImage& Y2, const DegradationModel& model2, const MultiBandImage& X1) {
  const MultiBandImage degraded = apply_forward(model2, X1);
  require_same_shape(Y2, degraded, "predicted_change");
  return Y2 - degraded;
}

}  // namespace rfcd
