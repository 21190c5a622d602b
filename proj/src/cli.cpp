#include "rfcd/cli.hpp"

#include "rfcd/config.hpp"
#include "rfcd/detection.hpp"
#include "rfcd/io.hpp"
#include "rfcd/scenarios.hpp"
#include "rfcd/synthesis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rfcd {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  bool seed_given() const { return seed_opt && seed_opt->count() > 0; }
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "configuration document (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out", f.out, "output directory");
  f.seed_opt = cmd->add_option("--seed", f.seed, "random seed");
}

void write_json(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
  }
}

MultiBandImage vector_image(const Vector& v, int width, int height) {
  return MultiBandImage(width, height, Matrix(v.transpose()));
}

MultiBandImage map_image(const BinaryMap& m, int width, int height) {
  Matrix data(1, static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) data(0, static_cast<Eigen::Index>(i)) = m[i];
  return MultiBandImage(width, height, std::move(data));
}

BinaryMap image_map(const MultiBandImage& img, const std::string& what) {
  if (img.band_count() != 1) throw std::runtime_error(what + " must have a single band");
  BinaryMap m(static_cast<std::size_t>(img.pixel_count()));
  for (int q = 0; q < img.pixel_count(); ++q) {
    const double v = img.data()(0, q);
    if (v != 0.0 && v != 1.0) throw std::runtime_error(what + " must contain only 0 and 1");
    m[static_cast<std::size_t>(q)] = v != 0.0 ? 1 : 0;
  }
  return m;
}

MultiBandImage load(const RunConfig& cfg, const std::string& p) {
  const fs::path path = cfg.resolve(p);
  const ImagePaths ip = image_paths(path);
  if (!fs::exists(ip.header) && !fs::exists(ip.payload)) {
    throw std::runtime_error("input image not found: " + path.string());
  }
  return read_image(path);
}

fs::path output_dir(const RunConfig& cfg, const CommonFlags& f) {
  return f.out.empty() ? cfg.resolve(cfg.output_dir) : fs::path(f.out);
}

// Spectral response of a sensor over `source_bands` plain bands; none when it is the identity.
std::optional<SpectralResponse> sensor_response(const SensorSpec& s, int source_bands) {
  SpectralResponse L = SpectralResponse::averaging(s.bands, source_bands);
  if (L.out_bands() == source_bands && L.matrix().isIdentity(0.0)) return std::nullopt;
  return L;
}

// ---------------------------------------------------------------------------------------

int cmd_simulate(const CommonFlags& f) {
  SimulationConfig sim = f.config.empty() ? default_simulation() : parse_simulation_config(read_json(f.config));
  const std::uint64_t seed = f.seed_given() ? f.seed : 0;
  sim.scene.seed = seed;
  const fs::path out = f.out.empty() ? fs::path("sim") : fs::path(f.out);

  const int g = std::gcd(sim.sensor1.pitch, sim.sensor2.pitch);
  if (sim.sensor1.pitch < 1 || sim.sensor2.pitch < 1) throw std::invalid_argument("sensor pitches must be >= 1");
  const int d1 = sim.sensor1.pitch / g, d2 = sim.sensor2.pitch / g;
  const Geometry latent{sim.scene.width, sim.scene.height, sim.scene.band_count};
  for (int d : {d1, d2}) {
    if (latent.width % d != 0 || latent.height % d != 0) {
      throw std::invalid_argument("scene size must be divisible by the decimation factor " + std::to_string(d));
    }
  }
  const DegradationModel m1{sensor_response(sim.sensor1, latent.bands), sensor_spatial(sim.sensor1, d1, latent)};
  const DegradationModel m2{sensor_response(sim.sensor2, latent.bands), sensor_spatial(sim.sensor2, d2, latent)};

  const MultiBandImage X1 = generate_latent_scene(sim.scene);
  const PlantedChange planted = plant_changes(X1, sim.change, seed + 1);
  const MultiBandImage clean1 = apply_forward(m1, X1);
  const MultiBandImage clean2 = apply_forward(m2, planted.X2);
  const NoiseModel n1 = noise_for_snr(clean1, sim.snr_db);
  const NoiseModel n2 = noise_for_snr(clean2, sim.snr_db);
  const MultiBandImage Y1 = simulate_observation(X1, m1, n1, seed + 2);
  const MultiBandImage Y2 = simulate_observation(planted.X2, m2, n2, seed + 3);

  write_image(Y1, out / "y1");
  write_image(Y2, out / "y2");
  write_image(X1, out / "x1_true");
  write_image(planted.X2, out / "x2_true");
  write_image(map_image(planted.truth, latent.width, latent.height), out / "truth");

  RunConfig run;
  run.y1 = "y1";
  run.y2 = "y2";
  run.truth = "truth";
  run.sensor1 = sim.sensor1;
  run.sensor2 = sim.sensor2;
  run.noise1 = n1.band_variances;
  run.noise2 = n2.band_variances;
  run.output_dir = "results";
  run.seed = seed;
  const ScenarioPlan plan = classify_scenario(sim.sensor1, Y1.geometry(), sim.sensor2, Y2.geometry());
  run.gamma = detection_gamma(plan.swapped ? n1 : n2);
  write_json(to_json(run), out / "run.json");
  json effective = to_json(sim);
  effective["seed"] = seed;
  write_json(effective, out / "simulation.json");
  std::cout << "wrote synthetic pair to " << out.string() << '\n';
  return 0;
}

struct Loaded {
  RunConfig cfg;
  MultiBandImage Y1;
  MultiBandImage Y2;
  ScenarioPlan plan;
  NoiseModel n1;  // input order
  NoiseModel n2;
};

Loaded load_run(const CommonFlags& f) {
  RunConfig cfg = load_run_config(f.config);
  if (f.seed_given()) cfg.seed = f.seed;
  MultiBandImage Y1 = load(cfg, cfg.y1);
  MultiBandImage Y2 = load(cfg, cfg.y2);
  ScenarioPlan plan = classify_scenario(cfg.sensor1, Y1.geometry(), cfg.sensor2, Y2.geometry());
  NoiseModel n1(cfg.noise1), n2(cfg.noise2);
  if (n1.band_count() != Y1.band_count() || n2.band_count() != Y2.band_count()) {
    throw std::invalid_argument("noise variance count does not match the image band count");
  }
  return {std::move(cfg), std::move(Y1), std::move(Y2), std::move(plan), std::move(n1), std::move(n2)};
}

int cmd_detect(const CommonFlags& f) {
  const Loaded in = load_run(f);
  const fs::path out = output_dir(in.cfg, f);
  const NoiseModel& r1 = in.plan.swapped ? in.n2 : in.n1;
  const NoiseModel& r2 = in.plan.swapped ? in.n1 : in.n2;
  AmParams params;
  params.lambda = in.cfg.lambda ? *in.cfg.lambda : default_lambda(r1, r2);
  params.gamma = in.cfg.gamma ? *in.cfg.gamma : default_gamma(r2);
  params.max_outer = in.cfg.max_outer;
  params.outer_tol = in.cfg.outer_tol;

  const AmState state = robust_fusion_cd(in.Y1, in.Y2, in.plan, in.n1, in.n2, params, in.cfg.solver);
  const Vector energy = change_energy(state.dX);
  const ThresholdOutcome t = threshold_map(energy, in.cfg.threshold);
  const int w = in.plan.latent.width, h = in.plan.latent.height;
  const RasterFormat fmt = parse_raster_format(in.cfg.map_format);
  const std::string ext = in.cfg.map_format;

  write_image(state.X1, out / "x1");
  write_image(state.dX, out / "dx");
  write_image(vector_image(energy, w, h), out / "energy");
  write_image(map_image(t.map, w, h), out / "map");
  export_map(t.map, w, h, out / ("map." + ext), fmt);
  export_energy(energy, w, h, out / ("energy." + ext), fmt);

  RunConfig effective = in.cfg;
  effective.lambda = params.lambda;
  effective.gamma = params.gamma;
  json report = {{"scenario", to_string(in.plan.id)},
                 {"swapped", in.plan.swapped},
                 {"latent", {{"width", w}, {"height", h}, {"bands", in.plan.latent.bands}}},
                 {"latent_pitch", in.plan.latent_pitch},
                 {"latent_bands", in.plan.latent_bands},
                 {"iterations", state.iteration},
                 {"converged", state.converged},
                 {"inner_nonconverged", state.inner_nonconverged},
                 {"objective", state.objective_trace.back()},
                 {"objective_trace", state.objective_trace},
                 {"lambda", params.lambda},
                 {"gamma", params.gamma},
                 {"threshold_rule", describe(in.cfg.threshold)},
                 {"tau", t.tau},
                 {"changed_pixels", std::accumulate(t.map.begin(), t.map.end(), 0L)}};
  write_json(report, out / "report.json");
  write_json(to_json(effective), out / "config.json");
  std::cout << to_string(in.plan.id) << ": " << state.iteration << " iterations, "
            << (state.converged ? "converged" : "not converged") << ", tau " << t.tau << '\n';
  return 0;
}

int cmd_baseline(const CommonFlags& f) {
  const Loaded in = load_run(f);
  const fs::path out = output_dir(in.cfg, f);
  const DegradationModel& first = in.plan.swapped ? in.plan.model2 : in.plan.model1;
  const DegradationModel& second = in.plan.swapped ? in.plan.model1 : in.plan.model2;
  const BaselineResult wc = wc_baseline(in.Y1, in.Y2, first, second, in.plan.latent, in.cfg.threshold);
  const int w = wc.common.width, h = wc.common.height;
  const RasterFormat fmt = parse_raster_format(in.cfg.map_format);
  const std::string ext = in.cfg.map_format;

  write_image(wc.change.dX, out / "wc_dx");
  write_image(vector_image(wc.change.energy, w, h), out / "wc_energy");
  write_image(map_image(wc.change.map, w, h), out / "wc_map");
  export_map(wc.change.map, w, h, out / ("wc_map." + ext), fmt);
  export_energy(wc.change.energy, w, h, out / ("wc_energy." + ext), fmt);
  json report = {{"common", {{"width", w}, {"height", h}, {"bands", wc.common.bands}}},
                 {"row_factor", wc.row_factor},
                 {"col_factor", wc.col_factor},
                 {"threshold_rule", describe(in.cfg.threshold)},
                 {"tau", wc.change.tau}};
  write_json(report, out / "wc_report.json");
  std::cout << "baseline on " << w << "x" << h << " grid, tau " << wc.change.tau << '\n';
  return 0;
}

MetricsReport score(const fs::path& energy_path, const fs::path& map_path, double tau, const BinaryMap& truth,
                    int latent_w, int latent_h) {
  const MultiBandImage e = read_image(energy_path);
  const BinaryMap m = image_map(read_image(map_path), map_path.string());
  if (e.band_count() != 1 || e.width() != read_image(map_path).width()) {
    throw std::runtime_error("energy and map images do not match");
  }
  if (latent_w % e.width() != 0 || latent_h % e.height() != 0) {
    throw std::runtime_error("output grid does not divide the truth grid");
  }
  const int fc = latent_w / e.width(), fr = latent_h / e.height();
  const Vector energy = replicate_blocks(Vector(e.data().row(0).transpose()), e.width(), e.height(), fr, fc);
  const BinaryMap map = replicate_blocks(m, e.width(), e.height(), fr, fc);
  MetricsReport r = evaluate_energy(energy, tau, truth, true);
  // Confusion counts come from the stored map rather than re-thresholding f32 energies.
  const MetricsReport counts = evaluate_map(map, truth);
  r.true_positive = counts.true_positive;
  r.false_positive = counts.false_positive;
  r.true_negative = counts.true_negative;
  r.false_negative = counts.false_negative;
  r.precision = counts.precision;
  r.recall = counts.recall;
  r.f1 = counts.f1;
  return r;
}

int cmd_evaluate(const CommonFlags& f) {
  RunConfig cfg = load_run_config(f.config);
  if (cfg.truth.empty()) throw std::invalid_argument("evaluate needs a truth image in the config");
  const fs::path out = output_dir(cfg, f);
  const MultiBandImage truth_img = load(cfg, cfg.truth);
  const BinaryMap truth = image_map(truth_img, "truth image");
  const int w = truth_img.width(), h = truth_img.height();

  if (!fs::exists(out / "report.json")) {
    throw std::runtime_error("no detection report in " + out.string() + "; run detect first");
  }
  const json report = read_json(out / "report.json");
  json result = {{"rf", to_json(score(out / "energy", out / "map", report.at("tau").get<double>(), truth, w, h))}};
  result["rf"]["scenario"] = report.at("scenario");
  if (fs::exists(out / "wc_report.json")) {
    const json wc = read_json(out / "wc_report.json");
    result["wc"] = to_json(score(out / "wc_energy", out / "wc_map", wc.at("tau").get<double>(), truth, w, h));
  }
  write_json(result, out / "evaluation.json");
  std::cout << "rf auc " << result["rf"]["auc"].get<double>();
  if (result.contains("wc")) std::cout << ", wc auc " << result["wc"]["auc"].get<double>();
  std::cout << '\n';
  return 0;
}

// "0,1;2;3,4" -> {{0,1},{2},{3,4}}
std::vector<std::vector<int>> parse_groups(const std::string& text) {
  std::vector<std::vector<int>> groups;
  std::stringstream ss(text);
  std::string group;
  while (std::getline(ss, group, ';')) {
    std::vector<int> g;
    std::stringstream gs(group);
    std::string item;
    while (std::getline(gs, item, ',')) {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() && item.find_first_not_of(' ', used) != std::string::npos) {
        throw std::invalid_argument("bad band index '" + item + "'");
      }
      g.push_back(v);
    }
    if (g.empty()) throw std::invalid_argument("empty band group in '" + text + "'");
    groups.push_back(std::move(g));
  }
  if (groups.empty()) throw std::invalid_argument("no band groups in '" + text + "'");
  return groups;
}

std::vector<std::vector<int>> singletons_like(const std::vector<std::vector<int>>& other) {
  std::set<int> all;
  for (const auto& g : other) all.insert(g.begin(), g.end());
  std::vector<std::vector<int>> out;
  for (int b : all) out.push_back({b});
  return out;
}

int cmd_classify(const CommonFlags& f, int pitch1, int pitch2, const std::string& bands1, const std::string& bands2) {
  SensorSpec a, b;
  if (!f.config.empty()) {
    const RunConfig cfg = load_run_config(f.config);
    a = cfg.sensor1;
    b = cfg.sensor2;
  } else {
    a.pitch = pitch1;
    b.pitch = pitch2;
    if (!bands1.empty()) a.bands = parse_groups(bands1);
    if (!bands2.empty()) b.bands = parse_groups(bands2);
    if (a.bands.empty() && b.bands.empty()) a.bands = b.bands = {{0}};
    if (a.bands.empty()) a.bands = singletons_like(b.bands);
    if (b.bands.empty()) b.bands = singletons_like(a.bands);
  }
  if (a.pitch < 1 || b.pitch < 1) throw std::invalid_argument("pitches must be >= 1");
  // Any extent covering whole pixels of both sensors gives the same pattern.
  const int extent = std::lcm(a.pitch, b.pitch) * 4;
  const Geometry ga{extent / a.pitch, extent / a.pitch, static_cast<int>(a.bands.size())};
  const Geometry gb{extent / b.pitch, extent / b.pitch, static_cast<int>(b.bands.size())};
  const ScenarioPlan plan = classify_scenario(a, ga, b, gb);
  std::cout << to_string(plan.id) << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Unsupervised change detection between two multi-band images of different resolutions"};
  app.require_subcommand(1);

  CommonFlags simulate_f, detect_f, baseline_f, evaluate_f, classify_f;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic image pair with planted changes");
  add_common(simulate, simulate_f, false);
  auto* detect = app.add_subcommand("detect", "run the robust-fusion detector");
  add_common(detect, detect_f, true);
  auto* baseline = app.add_subcommand("baseline", "run the common-resolution baseline");
  add_common(baseline, baseline_f, true);
  auto* evaluate = app.add_subcommand("evaluate", "score detector outputs against a truth map");
  add_common(evaluate, evaluate_f, true);
  auto* classify = app.add_subcommand("classify", "print the degradation scenario for two sensors");
  add_common(classify, classify_f, false);
  int pitch1 = 1, pitch2 = 1;
  std::string bands1, bands2;
  classify->add_option("--pitch1", pitch1, "pixel pitch of sensor 1");
  classify->add_option("--pitch2", pitch2, "pixel pitch of sensor 2");
  classify->add_option("--bands1", bands1, "band groups of sensor 1, e.g. \"0,1;2,3\"");
  classify->add_option("--bands2", bands2, "band groups of sensor 2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(simulate_f);
    if (*detect) return cmd_detect(detect_f);
    if (*baseline) return cmd_baseline(baseline_f);
    if (*evaluate) return cmd_evaluate(evaluate_f);
    if (*classify) return cmd_classify(classify_f, pitch1, pitch2, bands1, bands2);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace rfcd
