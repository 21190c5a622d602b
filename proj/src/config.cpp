#include "rfcd/config.hpp"

#include "rfcd/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace rfcd {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
  }
}

ThresholdRule threshold_from_json(const json& j) {
  reject_unknown(j, {"rule", "tau", "q"}, "threshold");
  const std::string rule = j.value("rule", "otsu");
  if (rule == "otsu") return OtsuThreshold{};
  if (rule == "fixed") return FixedThreshold{j.at("tau").get<double>()};
  if (rule == "quantile") {
    const double q = j.at("q").get<double>();
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("threshold quantile must lie in (0, 1)");
    return QuantileThreshold{q};
  }
  throw std::invalid_argument("unknown threshold rule '" + rule + "'");
}

json threshold_to_json(const ThresholdRule& r) {
  if (const auto* f = std::get_if<FixedThreshold>(&r)) return {{"rule", "fixed"}, {"tau", f->tau}};
  if (const auto* q = std::get_if<QuantileThreshold>(&r)) return {{"rule", "quantile"}, {"q", q->q}};
  return {{"rule", "otsu"}};
}

}  // namespace

fs::path RunConfig::resolve(const std::string& p) const {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

json to_json(const SensorSpec& s) {
  json j = {{"pitch", s.pitch}, {"bands", s.bands}};
  if (s.blur_sigma > 0.0) j["blur_sigma"] = s.blur_sigma;
  if (s.kernel_side > 0) j["kernel_side"] = s.kernel_side;
  return j;
}

SensorSpec sensor_from_json(const json& j) {
  reject_unknown(j, {"pitch", "bands", "blur_sigma", "kernel_side"}, "sensor");
  SensorSpec s;
  s.pitch = j.value("pitch", 1);
  s.bands = j.at("bands").get<std::vector<std::vector<int>>>();
  s.blur_sigma = j.value("blur_sigma", 0.0);
  s.kernel_side = j.value("kernel_side", 0);
  if (s.pitch < 1) throw std::invalid_argument("sensor pitch must be >= 1");
  if (s.blur_sigma < 0.0) throw std::invalid_argument("blur_sigma must be >= 0");
  if (s.kernel_side < 0 || (s.kernel_side > 0 && s.kernel_side % 2 == 0)) {
    throw std::invalid_argument("kernel_side must be odd");
  }
  return s;
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  reject_unknown(j, {"y1", "y2", "truth", "sensor1", "sensor2", "noise1", "noise2", "lambda", "gamma", "solver",
                     "outer", "threshold", "output_dir", "map_format", "seed"},
                 "run config");
  RunConfig c;
  c.base_dir = base_dir;
  c.y1 = j.at("y1").get<std::string>();
  c.y2 = j.at("y2").get<std::string>();
  c.truth = j.value("truth", "");
  c.sensor1 = sensor_from_json(j.at("sensor1"));
  c.sensor2 = sensor_from_json(j.at("sensor2"));
  c.noise1 = j.at("noise1").get<std::vector<double>>();
  c.noise2 = j.at("noise2").get<std::vector<double>>();
  for (const auto* n : {&c.noise1, &c.noise2}) {
    for (double v : *n) {
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("noise variances must be finite and > 0");
    }
  }
  if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
  if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
  if ((c.lambda && *c.lambda < 0.0) || (c.gamma && *c.gamma < 0.0)) {
    throw std::invalid_argument("lambda and gamma must be >= 0");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    reject_unknown(s, {"max_iters", "tol", "mu", "step_scale"}, "solver");
    c.solver.max_iters = s.value("max_iters", c.solver.max_iters);
    c.solver.tol = s.value("tol", c.solver.tol);
    c.solver.mu = s.value("mu", c.solver.mu);
    c.solver.step_scale = s.value("step_scale", c.solver.step_scale);
  }
  c.solver.validate();
  if (j.contains("outer")) {
    const json& o = j["outer"];
    reject_unknown(o, {"max_iters", "tol"}, "outer");
    c.max_outer = o.value("max_iters", c.max_outer);
    c.outer_tol = o.value("tol", c.outer_tol);
  }
  if (c.max_outer < 1 || !(c.outer_tol > 0.0)) throw std::invalid_argument("invalid outer iteration settings");
  if (j.contains("threshold")) c.threshold = threshold_from_json(j["threshold"]);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.map_format = j.value("map_format", c.map_format);
  parse_raster_format(c.map_format);
  c.seed = j.value("seed", std::uint64_t{0});
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("cannot parse config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

json to_json(const RunConfig& c) {
  json j = {{"y1", c.y1},
            {"y2", c.y2},
            {"sensor1", to_json(c.sensor1)},
            {"sensor2", to_json(c.sensor2)},
            {"noise1", c.noise1},
            {"noise2", c.noise2},
            {"solver",
             {{"max_iters", c.solver.max_iters},
              {"tol", c.solver.tol},
              {"mu", c.solver.mu},
              {"step_scale", c.solver.step_scale}}},
            {"outer", {{"max_iters", c.max_outer}, {"tol", c.outer_tol}}},
            {"threshold", threshold_to_json(c.threshold)},
            {"output_dir", c.output_dir},
            {"map_format", c.map_format},
            {"seed", c.seed}};
  if (!c.truth.empty()) j["truth"] = c.truth;
  if (c.lambda) j["lambda"] = *c.lambda;
  if (c.gamma) j["gamma"] = *c.gamma;
  return j;
}

SimulationConfig default_simulation() {
  SimulationConfig c;
  c.scene = SceneSpec{64, 64, 6, 12, 1.0, 0};
  c.change = ChangeSpec{0.1, 4, 1.0};
  c.sensor1.pitch = 4;
  c.sensor1.bands = {{0}, {1}, {2}, {3}, {4}, {5}};
  c.sensor2.pitch = 1;
  c.sensor2.bands = {{0, 1, 2}, {3, 4, 5}};
  return c;
}

SimulationConfig parse_simulation_config(const json& j) {
  reject_unknown(j, {"scene", "change", "sensor1", "sensor2", "snr_db"}, "simulation config");
  SimulationConfig c = default_simulation();
  if (j.contains("scene")) {
    const json& s = j["scene"];
    reject_unknown(s, {"width", "height", "band_count", "region_count", "signature_scale"}, "scene");
    c.scene.width = s.value("width", c.scene.width);
    c.scene.height = s.value("height", c.scene.height);
    c.scene.band_count = s.value("band_count", c.scene.band_count);
    c.scene.region_count = s.value("region_count", c.scene.region_count);
    c.scene.signature_scale = s.value("signature_scale", c.scene.signature_scale);
  }
  if (j.contains("change")) {
    const json& s = j["change"];
    reject_unknown(s, {"changed_fraction", "blob_count", "magnitude"}, "change");
    c.change.changed_fraction = s.value("changed_fraction", c.change.changed_fraction);
    c.change.blob_count = s.value("blob_count", c.change.blob_count);
    c.change.magnitude = s.value("magnitude", c.change.magnitude);
  }
  if (j.contains("sensor1")) c.sensor1 = sensor_from_json(j["sensor1"]);
  if (j.contains("sensor2")) c.sensor2 = sensor_from_json(j["sensor2"]);
  c.snr_db = j.value("snr_db", c.snr_db);
  c.scene.validate();
  return c;
}

json to_json(const SimulationConfig& c) {
  return {{"scene",
           {{"width", c.scene.width},
            {"height", c.scene.height},
            {"band_count", c.scene.band_count},
            {"region_count", c.scene.region_count},
            {"signature_scale", c.scene.signature_scale}}},
          {"change",
           {{"changed_fraction", c.change.changed_fraction},
            {"blob_count", c.change.blob_count},
            {"magnitude", c.change.magnitude}}},
          {"sensor1", to_json(c.sensor1)},
          {"sensor2", to_json(c.sensor2)},
          {"snr_db", c.snr_db}};
}

double default_lambda(const NoiseModel& n1, const NoiseModel& n2) {
  const Vector w1 = n1.inverse_variances(), w2 = n2.inverse_variances();
  return 1e-3 * (w1.sum() + w2.sum()) / static_cast<double>(w1.size() + w2.size());
}

double default_gamma(const NoiseModel& n2) {
  double mean = 0.0;
  for (double v : n2.band_variances) mean += v;
  mean /= static_cast<double>(n2.band_count());
  if (!(mean > 0.0)) throw std::invalid_argument("default gamma needs positive noise variances");
  return 2.0 * std::sqrt(static_cast<double>(n2.band_count())) / std::sqrt(mean);
}

double detection_gamma(const NoiseModel& n2) { return 0.02 * default_gamma(n2); }

json to_json(const MetricsReport& m) {
  json roc = json::array();
  for (const auto& p : m.roc) {
    roc.push_back({std::isfinite(p.threshold) ? json(p.threshold) : json("inf"), p.fpr, p.tpr});
  }
  return {{"true_positive", m.true_positive},
          {"false_positive", m.false_positive},
          {"true_negative", m.true_negative},
          {"false_negative", m.false_negative},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"auc", m.auc},
          {"roc", roc}};
}

}  // namespace rfcd
