#pragma once

#include "rfcd/image.hpp"
#include "rfcd/operators.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace rfcd {

using BinaryMap = std::vector<std::uint8_t>;

struct FixedThreshold {
  double tau = 0.0;
};
struct QuantileThreshold {
  double q = 0.9;
};
struct OtsuThreshold {};
using ThresholdRule = std::variant<FixedThreshold, QuantileThreshold, OtsuThreshold>;

std::string describe(const ThresholdRule& rule);

struct ChangeResult {
  MultiBandImage dX;
  Vector energy;
  double tau = 0.0;
  BinaryMap map;
  std::vector<double> trace;
};

// Per-pixel Euclidean norm of the spectral change vector.
Vector change_energy(const MultiBandImage& dX);

struct ThresholdOutcome {
  double tau;
  BinaryMap map;  // 1 iff energy >= tau
};

// Quantile uses linear interpolation between order statistics. Otsu scans the 255 bin
// edges of a 256-bin histogram over [min, max] and returns the edge maximizing the
// between-class variance; a constant energy image gets tau just above its value.
ThresholdOutcome threshold_map(const Vector& energy, const ThresholdRule& rule);

// Change detection after degrading both observations to a shared resolution: the
// least common multiple of their decimation factors and the band responses that can be
// synthesized from both sensors. Inputs are in any order; dX = second - first on the
// common grid, whose geometry is `common` and which is `factor` latent pixels per side.
struct BaselineResult {
  ChangeResult change;
  Geometry common;
  int row_factor = 1;
  int col_factor = 1;
};

BaselineResult wc_baseline(const MultiBandImage& first, const MultiBandImage& second,
                           const DegradationModel& model_first, const DegradationModel& model_second,
                           const Geometry& latent, const ThresholdRule& rule);

// Nearest-block replication of a coarse per-pixel vector to a finer grid.
Vector replicate_blocks(const Vector& coarse, int coarse_width, int coarse_height, int row_factor, int col_factor);
BinaryMap replicate_blocks(const BinaryMap& coarse, int coarse_width, int coarse_height, int row_factor,
                           int col_factor);

}  // namespace rfcd
