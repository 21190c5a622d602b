#pragma once

#include "rfcd/detection.hpp"
#include "rfcd/scenarios.hpp"
#include "rfcd/solvers.hpp"
#include "rfcd/synthesis.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rfcd {

// Detection run description. Relative paths resolve against the config file's directory.
struct RunConfig {
  std::filesystem::path base_dir;
  std::string y1;
  std::string y2;
  std::string truth;  // optional, used by `evaluate`
  SensorSpec sensor1;
  SensorSpec sensor2;
  std::vector<double> noise1;
  std::vector<double> noise2;
  std::optional<double> lambda;  // default: 1e-3 * mean inverse noise variance
  std::optional<double> gamma;   // default: 2 sqrt(bands2) / sigma2
  SolverOptions solver;
  int max_outer = 50;
  double outer_tol = 1e-5;
  ThresholdRule threshold = OtsuThreshold{};
  std::string output_dir = "out";
  std::string map_format = "pgm";
  std::uint64_t seed = 0;

  std::filesystem::path resolve(const std::string& p) const;
};

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

nlohmann::json to_json(const SensorSpec& s);
SensorSpec sensor_from_json(const nlohmann::json& j);

// Synthetic pair description for `simulate`.
struct SimulationConfig {
  SceneSpec scene;
  ChangeSpec change;
  SensorSpec sensor1;
  SensorSpec sensor2;
  double snr_db = 30.0;
};

// Defaults: 64x64 six-band scene; sensor 1 keeps all bands at pitch 4, sensor 2 averages
// them into two bands at pitch 1.
SimulationConfig default_simulation();
SimulationConfig parse_simulation_config(const nlohmann::json& j);
nlohmann::json to_json(const SimulationConfig& c);

// Regularization defaults in terms of the noise levels seen by the roles.
// default_gamma zeroes columns that carry noise only. When one sensor is spatially
// degraded the fusion step absorbs most of a change into X1, so the residual left for
// the correction step sits far below that level and detection needs a smaller weight;
// detection_gamma is the value `simulate` writes for its synthetic pairs.
double default_lambda(const NoiseModel& n1, const NoiseModel& n2);
double default_gamma(const NoiseModel& n2);
double detection_gamma(const NoiseModel& n2);

nlohmann::json to_json(const MetricsReport& m);

}  // namespace rfcd
