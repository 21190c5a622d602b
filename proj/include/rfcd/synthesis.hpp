#pragma once

#include "rfcd/detection.hpp"
#include "rfcd/image.hpp"
#include "rfcd/operators.hpp"

#include <cstdint>
#include <vector>

namespace rfcd {

struct SceneSpec {
  int width = 64;
  int height = 64;
  int band_count = 6;
  int region_count = 12;
  double signature_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ChangeSpec {
  double changed_fraction = 0.1;
  int blob_count = 4;
  double magnitude = 1.0;
};

struct PlantedChange {
  MultiBandImage X2;
  BinaryMap truth;
};

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct MetricsReport {
  long true_positive = 0;
  long false_positive = 0;
  long true_negative = 0;
  long false_negative = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<RocPoint> roc;
  double auc = 0.0;
};

// Voronoi cells around uniformly drawn seeds, each cell a uniform random signature in
// [0, signature_scale]^bands.
MultiBandImage generate_latent_scene(const SceneSpec& spec);

// Adds non-overlapping disks whose total area is about changed_fraction of the image.
// Each disk gets its own random unit spectral direction scaled by magnitude.
PlantedChange plant_changes(const MultiBandImage& X1, const ChangeSpec& spec, std::uint64_t seed);

// apply_forward plus matrix-normal noise.
MultiBandImage simulate_observation(const MultiBandImage& X, const DegradationModel& model, const NoiseModel& noise,
                                    std::uint64_t seed);

// Band variances giving the requested signal-to-noise ratio (dB) for a noiseless image.
NoiseModel noise_for_snr(const MultiBandImage& clean, double snr_db);

// Confusion counts of `map` against `truth`.
MetricsReport evaluate_map(const BinaryMap& map, const BinaryMap& truth);

// Confusion counts at tau and, if sweep, the ROC over all distinct energy values with
// trapezoidal AUC.
MetricsReport evaluate_energy(const Vector& energy, double tau, const BinaryMap& truth, bool sweep = true);

}  // namespace rfcd
