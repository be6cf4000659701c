#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roomtherm/calibrate.hpp"
#include "roomtherm/config.hpp"
#include "roomtherm/error.hpp"
#include "roomtherm/evaluate.hpp"
#include "roomtherm/io.hpp"
#include "roomtherm/plane_fit.hpp"
#include "roomtherm/pointcloud.hpp"
#include "roomtherm/room_extract.hpp"
#include "roomtherm/scenario.hpp"
#include "roomtherm/thermal.hpp"

namespace fs = std::filesystem;
using namespace roomtherm;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitStage = 3;
constexpr int kExitStall = 4;

template <typename T>
void take_flag(const std::optional<T>& flag, T& target) {
  if (flag) target = *flag;
}

template <typename T>
CLI::Option* add_optional(CLI::App* app, const std::string& name, std::optional<T>& target,
                          const std::string& description = "") {
  return app->add_option_function<T>(name, [&target](const T& v) { target = v; }, description);
}

PipelineConfig effective_config(const std::string& flag) {
  std::string path = flag;
  if (path.empty()) {
    if (const char* env = std::getenv("ROOMTHERM_CONFIG")) path = env;
  }
  return path.empty() ? PipelineConfig{} : load_config(path);
}

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || std::isnan(v)) throw InputError(what + ": not a number: '" + text + "'");
  return v;
}

// wall:<index>,<u>,<v>,<w>,<h>
SyntheticOpening parse_opening(const std::string& text) {
  const std::string prefix = "wall:";
  if (text.rfind(prefix, 0) != 0) throw InputError("--opening: expected wall:<i>,<u>,<v>,<w>,<h>, got '" + text + "'");
  std::vector<double> values;
  std::stringstream ss(text.substr(prefix.size()));
  std::string cell;
  while (std::getline(ss, cell, ',')) values.push_back(parse_number(cell, "--opening"));
  if (values.size() != 5 || values[0] != std::floor(values[0])) {
    throw InputError("--opening: expected wall:<i>,<u>,<v>,<w>,<h>, got '" + text + "'");
  }
  return {static_cast<int>(values[0]), {values[1], values[2], values[3], values[4]}};
}

ParameterSpace space_from_flags(const std::string& space_file, const std::vector<std::string>& params,
                                const ParameterSpace& fallback) {
  if (!space_file.empty() && !params.empty()) throw InputError("use either --space or --param, not both");
  if (!space_file.empty()) return space_from_json(read_json_file(space_file));
  if (!params.empty()) {
    ParameterSpace space;
    for (const auto& p : params) space.entries.push_back(ParameterSpace::with_default_bounds(p));
    space.validate();
    return space;
  }
  return fallback;
}

void print_parameter_table(std::ostream& out, const ParameterSpace& space, const CalibrationResult& r) {
  char line[160];
  std::snprintf(line, sizeof(line), "%-28s %14s %14s %12s %12s\n", "Parameter", "Initial", "Calibrated", "Lower",
                "Upper");
  out << line;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& e = space.entries[i];
    std::snprintf(line, sizeof(line), "%-28s %14.6g %14.6g %12.6g %12.6g\n", e.path.c_str(), r.initial_values[i],
                  r.calibrated_values[i], e.lower, e.upper);
    out << line;
  }
  out << "final RMSE " << r.final_rmse << " C after " << r.iterations << " iterations (" << to_string(r.reason)
      << ")\n";
}

// Joins a trace's HVAC column with a weather CSV, or reads it from a separate schedule CSV.
HvacSchedule load_schedule(const SeriesTable& weather_table, const std::string& schedule_path) {
  if (!schedule_path.empty()) {
    const auto s = read_series_csv(schedule_path);
    if (s.hvac_on.size() != s.time_s.size()) throw InputError(schedule_path + ": no hvac_on column");
    if (s.time_s.size() != weather_table.time_s.size()) {
      throw InputError("alignment: schedule has " + std::to_string(s.time_s.size()) + " rows, weather has " +
                       std::to_string(weather_table.time_s.size()));
    }
    for (std::size_t i = 0; i < s.time_s.size(); ++i) {
      if (std::abs(s.time_s[i] - weather_table.time_s[i]) > 1e-6) {
        throw InputError("alignment: schedule and weather timestamps differ at row " + std::to_string(i));
      }
    }
    return s.hvac_on;
  }
  if (weather_table.hvac_on.size() != weather_table.time_s.size()) {
    throw InputError("no HVAC schedule: pass --schedule or add an hvac_on column to the weather file");
  }
  return weather_table.hvac_on;
}

int run_pipeline(const PipelineConfig& c, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    all_ok = all_ok && ok;
  };

  // gen -> segment -> extract over the seeded corpus.
  std::size_t planes_ok = 0, dims_ok = 0, yaw_ok = 0;
  const auto corpus_start = std::chrono::steady_clock::now();
  std::ofstream trials(out_dir / "segmentation_trials.csv");
  trials << "seed,planes,planes_ok,length,width,height,dims_ok,yaw_ok,error\n";
  for (std::size_t k = 0; k < c.pipeline.segmentation_trials; ++k) {
    SyntheticRoomSpec spec = c.room;
    spec.seed = c.room.seed + k;
    MsacConfig msac = c.segment.msac;
    msac.seed = c.segment.msac.seed + k;
    const auto t = run_segmentation_trial(spec, msac, c.segment.max_planes, c.extract);
    planes_ok += t.planes_ok;
    dims_ok += t.dims_ok;
    yaw_ok += t.yaw_ok;
    trials << t.seed << ',' << t.planes << ',' << t.planes_ok << ',' << t.length << ',' << t.width << ',' << t.height
           << ',' << t.dims_ok << ',' << t.yaw_ok << ',' << t.error << '\n';
  }
  const double corpus_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - corpus_start).count();
  const std::size_t n = c.pipeline.segmentation_trials;
  const std::size_t need = n - n / 50;  // 49 of 50
  report("segmentation", planes_ok >= need && corpus_s < 30.0,
         std::to_string(planes_ok) + "/" + std::to_string(n) + " rooms with every surface recovered, corpus " +
             std::to_string(corpus_s) + " s");
  report("geometry", dims_ok >= need && yaw_ok >= need,
         std::to_string(dims_ok) + "/" + std::to_string(n) + " within 0.02 m, " + std::to_string(yaw_ok) + "/" +
             std::to_string(n) + " unchanged under 30 deg yaw");

  // The first room of the corpus goes on through the thermal stages.
  const auto room = generate_room(c.room);
  save_cloud(room.cloud, out_dir / "cloud.ply", CloudFormat::PlyAscii);
  write_json_file(out_dir / "truth.json", to_json(room.truth));
  const auto planes = extract_planes(room.cloud, c.segment.msac, c.segment.max_planes);
  if (planes.empty()) throw StageError("segment: no planes");
  write_json_file(out_dir / "planes.json", segmentation_report(planes));
  const auto geometry = to_building_geometry(extract_room(planes, room.cloud, c.extract));
  write_json_file(out_dir / "geometry.json", to_json(geometry));
  std::cout << "room " << geometry.length << " x " << geometry.width << " x " << geometry.height << " m, "
            << geometry.walls.size() << " walls\n";

  const BuildingModel truth = build_model(geometry, c.parameters.materials, c.parameters.hvac, c.model);
  write_json_file(out_dir / "model.json", to_json(truth));
  const auto experiment = make_recovery_experiment(truth, c.scenario, c.space, c.pipeline.initial_scale, c.calibration.dt);
  write_trace_csv(out_dir / "observed.csv", experiment.observed, experiment.weather);
  write_json_file(out_dir / "initial_model.json", to_json(experiment.initial));

  const auto cal_start = std::chrono::steady_clock::now();
  const auto result = calibrate(experiment.initial, c.space, experiment.observed, experiment.weather, c.calibration);
  const double cal_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - cal_start).count();
  write_json_file(out_dir / "calibration.json", calibration_report(result, c.space));
  write_json_file(out_dir / "calibrated_model.json", to_json(result.model));
  print_parameter_table(std::cout, c.space, result);

  const HvacSchedule& schedule = experiment.observed.hvac_on;
  const Trace initial_trace = simulate(experiment.initial, experiment.weather, schedule, c.calibration.dt,
                                       c.scenario.t_init_c);
  const Trace calibrated_trace = simulate(result.model, experiment.weather, schedule, c.calibration.dt,
                                          c.scenario.t_init_c);
  write_gnuplot(out_dir / "calibration", calibrated_trace, &experiment.observed, experiment.weather, &initial_trace);

  bool monotone = true;
  for (std::size_t i = 1; i < result.objective_history.size(); ++i) {
    monotone = monotone && result.objective_history[i] <= result.objective_history[i - 1];
  }
  report("calibration", result.final_rmse <= c.calibration.rmse_threshold && cal_s < 300.0 && monotone,
         "RMSE " + std::to_string(result.objective_history.front()) + " -> " + std::to_string(result.final_rmse) +
             " C in " + std::to_string(result.iterations) + " iterations, " + std::to_string(cal_s) + " s, history " +
             (monotone ? "non-increasing" : "NOT monotone"));
  std::cout << "artifacts in " << out_dir.string() << "\n";
  return all_ok ? 0 : kExitStage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Room geometry from point clouds, RC thermal simulation and model calibration"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Pipeline config JSON (default: $ROOMTHERM_CONFIG)");

  // gen-cloud
  auto* gen = app.add_subcommand("gen-cloud", "Sample a synthetic box room");
  std::vector<double> dims;
  std::optional<double> noise, outliers, density;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> opening_flags;
  bool ceiling = false, no_openings = false;
  std::string cloud_out, truth_out;
  gen->add_option("--dims", dims, "Length width height in m")->expected(3);
  add_optional(gen, "--noise", noise, "Gaussian noise sigma along the surface normal, m");
  add_optional(gen, "--outliers", outliers, "Fraction of extra uniform outlier points");
  add_optional(gen, "--density", density, "Points per m^2");
  add_optional(gen, "--seed", seed, "RNG seed");
  gen->add_option("--opening", opening_flags, "wall:<i>,<u>,<v>,<w>,<h> (repeatable; replaces config openings)");
  gen->add_flag("--no-openings", no_openings, "Solid walls");
  gen->add_flag("--ceiling", ceiling, "Also sample the ceiling");
  gen->add_option("--out", cloud_out, "Cloud file (.ply or .xyz)")->required();
  gen->add_option("--truth", truth_out, "Ground-truth JSON (default: cloud path with .truth.json extension)");

  // gen-weather
  auto* weather_cmd = app.add_subcommand("gen-weather", "Write a sinusoidal weather CSV with a daytime HVAC schedule");
  std::optional<double> hours, step_s, mean_c, amplitude_c, peak_hour, on_hour, off_hour;
  std::string weather_out;
  add_optional(weather_cmd, "--hours", hours);
  add_optional(weather_cmd, "--step", step_s, "Sample spacing, s");
  add_optional(weather_cmd, "--mean", mean_c);
  add_optional(weather_cmd, "--amplitude", amplitude_c);
  add_optional(weather_cmd, "--peak-hour", peak_hour);
  add_optional(weather_cmd, "--on-hour", on_hour);
  add_optional(weather_cmd, "--off-hour", off_hour);
  weather_cmd->add_option("--out", weather_out)->required();

  // segment
  auto* seg = app.add_subcommand("segment", "Extract planes from a cloud");
  std::string seg_cloud, seg_out;
  std::optional<std::size_t> max_planes, min_inliers, max_iterations;
  std::optional<double> distance, confidence;
  std::optional<std::uint64_t> seg_seed;
  seg->add_option("--cloud", seg_cloud)->required();
  seg->add_option("--out", seg_out, "Planes JSON")->required();
  add_optional(seg, "--max-planes", max_planes);
  add_optional(seg, "--threshold", distance, "Inlier distance, m");
  add_optional(seg, "--confidence", confidence);
  add_optional(seg, "--min-inliers", min_inliers);
  add_optional(seg, "--max-iterations", max_iterations);
  add_optional(seg, "--seed", seg_seed);

  // extract
  auto* ext = app.add_subcommand("extract", "Label planes and build the room geometry");
  std::string ext_cloud, ext_planes, ext_out;
  ext->add_option("--cloud", ext_cloud)->required();
  ext->add_option("--planes", ext_planes)->required();
  ext->add_option("--out", ext_out, "Geometry JSON")->required();

  // build-model
  auto* build = app.add_subcommand("build-model", "Turn a geometry into a thermal model");
  std::string build_geometry, build_params, build_out;
  std::optional<double> internal_gain;
  build->add_option("--geometry", build_geometry)->required();
  build->add_option("--parameters", build_params, "Materials and HVAC JSON (default: config)");
  add_optional(build, "--internal-gain", internal_gain, "W");
  build->add_option("--out", build_out, "Model JSON")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate zone temperature");
  std::string sim_model, sim_weather, sim_schedule, sim_out, sim_plot;
  std::optional<double> sim_dt, t_init;
  sim->add_option("--model", sim_model)->required();
  sim->add_option("--weather", sim_weather, "CSV time_s,t_out_c[,hvac_on]")->required();
  sim->add_option("--schedule", sim_schedule, "CSV time_s,hvac_on");
  add_optional(sim, "--dt", sim_dt, "Integration step, s");
  add_optional(sim, "--t-init", t_init, "Initial temperature of every node (default: first outdoor value)");
  sim->add_option("--out", sim_out, "Trace CSV")->required();
  sim->add_option("--plot", sim_plot, "Also write <prefix>.dat and <prefix>.gp");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Fit model parameters to an observed trace");
  std::string cal_model, cal_observed, cal_weather, cal_space, cal_report, cal_out_model, cal_plot;
  std::vector<std::string> cal_params;
  std::optional<std::size_t> cal_max_iter;
  std::optional<double> cal_threshold, cal_lr, cal_burn_in, cal_dt;
  bool serial = false;
  cal->add_option("--model", cal_model, "Initial model JSON")->required();
  cal->add_option("--observed", cal_observed, "CSV time_s,[t_out_c,]t_zone_c,hvac_on")->required();
  cal->add_option("--weather", cal_weather, "CSV time_s,t_out_c (default: t_out_c of --observed)");
  cal->add_option("--space", cal_space, "JSON list of {path, lower, upper}");
  cal->add_option("--param", cal_params, "Free parameter path with default bounds (repeatable)");
  cal->add_option("--report", cal_report, "Calibration report JSON")->required();
  cal->add_option("--out-model", cal_out_model, "Calibrated model JSON");
  cal->add_option("--plot", cal_plot, "Also write <prefix>.dat and <prefix>.gp");
  add_optional(cal, "--max-iterations", cal_max_iter);
  add_optional(cal, "--threshold", cal_threshold, "Stop once RMSE is at or below this, C");
  add_optional(cal, "--learning-rate", cal_lr);
  add_optional(cal, "--burn-in", cal_burn_in, "Unscored lead-in, s");
  add_optional(cal, "--dt", cal_dt);
  cal->add_flag("--serial", serial, "Evaluate gradient components one at a time");

  // monitor
  auto* mon = app.add_subcommand("monitor", "Replay a stream through the re-calibration watchdog");
  std::string mon_model, mon_stream, mon_out, mon_space, mon_threshold, mon_final;
  std::vector<std::string> mon_params;
  std::optional<double> mon_window, mon_dt;
  mon->add_option("--model", mon_model)->required();
  mon->add_option("--stream", mon_stream, "CSV time_s,t_out_c,t_zone_c,hvac_on")->required();
  add_optional(mon, "--window", mon_window, "Rolling window, s");
  mon->add_option("--threshold", mon_threshold, "RMSE trigger in C; 'inf' disables");
  mon->add_option("--space", mon_space);
  mon->add_option("--param", mon_params);
  add_optional(mon, "--dt", mon_dt);
  mon->add_option("--out", mon_out, "Event CSV")->required();
  mon->add_option("--final-model", mon_final, "Model in use at the end of the stream");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "End-to-end runs");
  pipe->require_subcommand(1);
  auto* pipe_run = pipe->add_subcommand("run", "gen -> segment -> extract -> build -> simulate -> calibrate");
  std::string pipe_out;
  std::optional<std::size_t> pipe_trials;
  pipe_run->add_option("--out-dir", pipe_out, "Artifact directory (default: config pipeline.output_dir)");
  add_optional(pipe_run, "--trials", pipe_trials, "Segmentation corpus size");
  auto* pipe_defaults = pipe->add_subcommand("defaults", "Write the reference config and parameter files");
  std::string defaults_config, defaults_params;
  pipe_defaults->add_option("--config-out", defaults_config);
  pipe_defaults->add_option("--parameters-out", defaults_params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    PipelineConfig c = effective_config(config_path);

    if (*gen) {
      SyntheticRoomSpec spec = c.room;
      if (!dims.empty()) {
        spec.length = dims[0];
        spec.width = dims[1];
        spec.height = dims[2];
      }
      take_flag(noise, spec.noise_sigma);
      take_flag(outliers, spec.outlier_fraction);
      take_flag(density, spec.density);
      take_flag(seed, spec.seed);
      if (ceiling) spec.include_ceiling = true;
      if (no_openings) spec.openings.clear();
      if (!opening_flags.empty()) {
        spec.openings.clear();
        for (const auto& o : opening_flags) spec.openings.push_back(parse_opening(o));
      }
      const auto room = generate_room(spec);
      save_cloud(room.cloud, cloud_out, format_from_extension(cloud_out));
      if (truth_out.empty()) truth_out = fs::path(cloud_out).replace_extension(".truth.json").string();
      write_json_file(truth_out, to_json(room.truth));
      std::cout << room.cloud.size() << " points (" << room.truth.outlier_points << " outliers) -> " << cloud_out
                << "\n";
    } else if (*weather_cmd) {
      ScenarioConfig s = c.scenario;
      take_flag(hours, s.hours);
      take_flag(step_s, s.step_s);
      take_flag(mean_c, s.mean_c);
      take_flag(amplitude_c, s.amplitude_c);
      take_flag(peak_hour, s.peak_hour);
      take_flag(on_hour, s.hvac_on_hour);
      take_flag(off_hour, s.hvac_off_hour);
      const auto w = s.weather();
      const auto schedule = s.schedule(w);
      write_weather_csv(weather_out, w, &schedule);
      std::cout << w.size() << " samples -> " << weather_out << "\n";
    } else if (*seg) {
      take_flag(max_planes, c.segment.max_planes);
      take_flag(distance, c.segment.msac.distance_threshold);
      take_flag(confidence, c.segment.msac.confidence);
      take_flag(min_inliers, c.segment.msac.min_inliers);
      take_flag(max_iterations, c.segment.msac.max_iterations);
      take_flag(seg_seed, c.segment.msac.seed);
      c.segment.msac.validate();
      if (c.segment.max_planes < 1) throw InputError("--max-planes must be >= 1");
      const auto cloud = load_cloud(seg_cloud, format_from_extension(seg_cloud));
      const auto planes = extract_planes(cloud, c.segment.msac, c.segment.max_planes);
      if (planes.empty()) throw StageError("segment: no planes found in " + seg_cloud);
      write_json_file(seg_out, segmentation_report(planes));
      std::cout << planes.size() << " planes -> " << seg_out << "\n";
    } else if (*ext) {
      const auto cloud = load_cloud(ext_cloud, format_from_extension(ext_cloud));
      const auto plane_models = planes_from_report(read_json_file(ext_planes));
      const auto planes = assign_inliers(plane_models, cloud, c.segment.msac.distance_threshold);
      const auto room = extract_room(planes, cloud, c.extract);
      const auto geometry = to_building_geometry(room);
      write_json_file(ext_out, to_json(geometry));
      std::size_t doors = 0;
      for (const auto& o : room.openings) doors += o.kind == OpeningKind::Door;
      std::cout << geometry.length << " x " << geometry.width << " x " << geometry.height << " m, "
                << room.walls.size() << " walls, " << room.openings.size() << " openings (" << doors
                << " doors) -> " << ext_out << "\n";
    } else if (*build) {
      const auto geometry = geometry_from_json(read_json_file(build_geometry));
      const ModelParameters params =
          build_params.empty() ? c.parameters : parameters_from_json(read_json_file(build_params));
      take_flag(internal_gain, c.model.internal_gain);
      const auto model = build_model(geometry, params.materials, params.hvac, c.model);
      write_json_file(build_out, to_json(model));
      std::cout << model.surfaces.size() << " surfaces, UA " << total_exterior_conductance(model) << " W/K -> "
                << build_out << "\n";
    } else if (*sim) {
      const auto model = model_from_json(read_json_file(sim_model));
      const auto table = read_series_csv(sim_weather);
      const auto weather = table.weather();
      const auto schedule = load_schedule(table, sim_schedule);
      if (weather.size() == 0) throw InputError(sim_weather + ": no samples");
      const double dt = sim_dt.value_or(c.calibration.dt);
      const auto trace = simulate(model, weather, schedule, dt, t_init.value_or(weather.t_out.front()));
      write_trace_csv(sim_out, trace, weather);
      if (!sim_plot.empty()) write_gnuplot(sim_plot, trace, nullptr, weather);
      std::cout << trace.size() << " samples -> " << sim_out << "\n";
    } else if (*cal) {
      const auto initial = model_from_json(read_json_file(cal_model));
      const auto observed_table = read_series_csv(cal_observed);
      const auto observed = observed_table.trace();
      const auto weather = cal_weather.empty() ? observed_table.weather() : read_series_csv(cal_weather).weather();
      const auto space = space_from_flags(cal_space, cal_params, c.space);
      take_flag(cal_max_iter, c.calibration.max_iterations);
      take_flag(cal_threshold, c.calibration.rmse_threshold);
      take_flag(cal_lr, c.calibration.learning_rate);
      take_flag(cal_burn_in, c.calibration.burn_in_s);
      take_flag(cal_dt, c.calibration.dt);
      if (serial) c.calibration.parallel = false;

      auto finish = [&](const CalibrationResult& r) {
        write_json_file(cal_report, calibration_report(r, space));
        if (!cal_out_model.empty()) write_json_file(cal_out_model, to_json(r.model));
        if (!cal_plot.empty()) {
          const double t0 = observed.t_zone.front();
          const auto before = simulate(initial, weather, observed.hvac_on, c.calibration.dt, t0);
          const auto after = simulate(r.model, weather, observed.hvac_on, c.calibration.dt, t0);
          write_gnuplot(cal_plot, after, &observed, weather, &before);
        }
        print_parameter_table(std::cout, space, r);
      };
      try {
        finish(calibrate(initial, space, observed, weather, c.calibration));
      } catch (const CalibrationStall& stall) {
        finish(stall.result());
        std::cerr << "roomtherm: " << stall.what() << "\n";
        return kExitStall;
      }
    } else if (*mon) {
      const auto model = model_from_json(read_json_file(mon_model));
      const auto table = read_series_csv(mon_stream);
      const auto space = space_from_flags(mon_space, mon_params, c.space);
      take_flag(mon_window, c.watchdog.window_s);
      take_flag(mon_dt, c.watchdog.dt);
      if (!mon_threshold.empty()) c.watchdog.threshold_c = parse_number(mon_threshold, "--threshold");
      BuildingModel final_model;
      const auto events =
          watchdog(model, table.trace(), table.weather(), space, c.calibration, c.watchdog, &final_model);
      write_events_csv(mon_out, events);
      if (!mon_final.empty()) write_json_file(mon_final, to_json(final_model));
      std::cout << events.size() << " events -> " << mon_out << "\n";
    } else if (*pipe_run) {
      take_flag(pipe_trials, c.pipeline.segmentation_trials);
      c.validate();
      return run_pipeline(c, pipe_out.empty() ? fs::path(c.pipeline.output_dir) : fs::path(pipe_out));
    } else if (*pipe_defaults) {
      if (defaults_config.empty() && defaults_params.empty()) {
        std::cout << to_json(PipelineConfig{}).dump(2) << "\n";
      }
      if (!defaults_config.empty()) write_json_file(defaults_config, to_json(PipelineConfig{}));
      if (!defaults_params.empty()) write_json_file(defaults_params, to_json(ModelParameters{}));
    }
  } catch (const CalibrationStall& e) {
    std::cerr << "roomtherm: " << e.what() << "\n";
    return kExitStall;
  } catch (const InputError& e) {
    std::cerr << "roomtherm: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StageError& e) {
    std::cerr << "roomtherm: " << e.what() << "\n";
    return kExitStage;
  } catch (const Error& e) {
    std::cerr << "roomtherm: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "roomtherm: " << e.what() << "\n";
    return kExitStage;
  }
  return 0;
}
