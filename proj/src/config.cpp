#include "roomtherm/config.hpp"

#include "roomtherm/error.hpp"

namespace roomtherm {
namespace {

// Overwrites `target` when `key` is present; wraps type errors as InputError.
template <typename T>
void take(const Json& j, const char* key, T& target, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(where + "." + key + ": " + e.what());
  }
}

Json opening_json(const SyntheticOpening& o) {
  return {{"wall", o.wall_index}, {"u", o.rect.u}, {"v", o.rect.v}, {"w", o.rect.w}, {"h", o.rect.h}};
}

SyntheticOpening opening_from(const Json& j, const std::string& where) {
  check_keys(j, {"wall", "u", "v", "w", "h"}, where);
  SyntheticOpening o;
  take(j, "wall", o.wall_index, where);
  take(j, "u", o.rect.u, where);
  take(j, "v", o.rect.v, where);
  take(j, "w", o.rect.w, where);
  take(j, "h", o.rect.h, where);
  return o;
}

}  // namespace

SyntheticRoomSpec PipelineConfig::default_room() {
  SyntheticRoomSpec spec;
  spec.noise_sigma = 0.005;
  spec.outlier_fraction = 0.10;
  spec.seed = 7;
  spec.openings = {{0, {2.0, 1.0, 1.2, 1.5}}, {1, {1.5, 0.0, 0.9, 2.0}}};
  return spec;
}

void PipelineConfig::validate() const {
  room.validate();
  segment.msac.validate();
  if (segment.max_planes < 1) throw InputError("segment.max_planes must be >= 1");
  const auto& o = extract.openings;
  if (!(extract.labels.angle_tol_deg > 0 && extract.labels.angle_tol_deg < 45)) {
    throw InputError("extract.angle_tol_deg must be in (0, 45)");
  }
  if (!(o.grid_res > 0 && o.min_cell_points >= 0 && o.min_area >= 0 && o.min_island_cells >= 0)) {
    throw InputError("extract: grid_res must be > 0 and the opening thresholds >= 0");
  }
  calibration.validate();
  space.validate();
  for (const auto& [element, m] : parameters.materials) m.validate(to_string(element));
  parameters.hvac.validate();
  if (!(scenario.hours > 0 && scenario.step_s > 0)) throw InputError("scenario.hours and scenario.step_s must be > 0");
  if (!(pipeline.initial_scale > 0)) throw InputError("pipeline.initial_scale must be > 0");
  if (pipeline.segmentation_trials < 1) throw InputError("pipeline.segmentation_trials must be >= 1");
}

Json to_json(const PipelineConfig& c) {
  Json openings = Json::array();
  for (const auto& o : c.room.openings) openings.push_back(opening_json(o));
  Json orientation = nullptr;
  if (c.segment.msac.orientation) {
    const auto& r = c.segment.msac.orientation->reference;
    orientation = {{"reference", {r.x(), r.y(), r.z()}}, {"max_angle_deg", c.segment.msac.orientation->max_angle_deg}};
  }
  const auto params = to_json(c.parameters);
  return {
      {"room",
       {{"length", c.room.length},
        {"width", c.room.width},
        {"height", c.room.height},
        {"noise_sigma", c.room.noise_sigma},
        {"outlier_fraction", c.room.outlier_fraction},
        {"density", c.room.density},
        {"include_ceiling", c.room.include_ceiling},
        {"seed", c.room.seed},
        {"openings", openings}}},
      {"segment",
       {{"distance_threshold", c.segment.msac.distance_threshold},
        {"confidence", c.segment.msac.confidence},
        {"max_iterations", c.segment.msac.max_iterations},
        {"min_inliers", c.segment.msac.min_inliers},
        {"seed", c.segment.msac.seed},
        {"orientation", orientation},
        {"max_planes", c.segment.max_planes}}},
      {"extract",
       {{"angle_tol_deg", c.extract.labels.angle_tol_deg},
        {"height_fraction", c.extract.labels.height_fraction},
        {"min_ceiling_clearance", c.extract.labels.min_ceiling_clearance},
        {"perpendicular_tol_deg", c.extract.perpendicular_tol_deg},
        {"grid_res", c.extract.openings.grid_res},
        {"min_opening_area", c.extract.openings.min_area},
        {"door_min_height", c.extract.openings.door_min_height},
        {"min_cell_points", c.extract.openings.min_cell_points},
        {"min_island_cells", c.extract.openings.min_island_cells}}},
      {"materials", params.at("materials")},
      {"hvac", params.at("hvac")},
      {"model",
       {{"h_in", c.model.h_in},
        {"h_out", c.model.h_out},
        {"air_capacitance_multiplier", c.model.air_capacitance_multiplier},
        {"internal_gain", c.model.internal_gain},
        {"floor_exterior", c.model.floor_exterior}}},
      {"scenario",
       {{"hours", c.scenario.hours},
        {"step_s", c.scenario.step_s},
        {"mean_c", c.scenario.mean_c},
        {"amplitude_c", c.scenario.amplitude_c},
        {"peak_hour", c.scenario.peak_hour},
        {"hvac_on_hour", c.scenario.hvac_on_hour},
        {"hvac_off_hour", c.scenario.hvac_off_hour},
        {"t_init_c", c.scenario.t_init_c}}},
      {"calibration",
       {{"learning_rate", c.calibration.learning_rate},
        {"fd_rel_step", c.calibration.fd_rel_step},
        {"max_iterations", c.calibration.max_iterations},
        {"rmse_threshold", c.calibration.rmse_threshold},
        {"min_improvement", c.calibration.min_improvement},
        {"backtrack_factor", c.calibration.backtrack_factor},
        {"max_halvings", c.calibration.max_halvings},
        {"dt", c.calibration.dt},
        {"burn_in_s", c.calibration.burn_in_s},
        {"parallel", c.calibration.parallel}}},
      {"parameters", to_json(c.space)},
      {"watchdog",
       {{"window_s", c.watchdog.window_s}, {"threshold_c", c.watchdog.threshold_c}, {"dt", c.watchdog.dt}}},
      {"pipeline",
       {{"segmentation_trials", c.pipeline.segmentation_trials},
        {"initial_scale", c.pipeline.initial_scale},
        {"output_dir", c.pipeline.output_dir}}},
  };
}

PipelineConfig config_from_json(const Json& j, PipelineConfig c) {
  check_keys(j, {"room", "segment", "extract", "materials", "hvac", "model", "scenario", "calibration", "parameters",
                 "watchdog", "pipeline"},
             "config");
  if (j.contains("room")) {
    const auto& r = j.at("room");
    check_keys(r, {"length", "width", "height", "noise_sigma", "outlier_fraction", "density", "include_ceiling", "seed",
                   "openings"},
               "room");
    take(r, "length", c.room.length, "room");
    take(r, "width", c.room.width, "room");
    take(r, "height", c.room.height, "room");
    take(r, "noise_sigma", c.room.noise_sigma, "room");
    take(r, "outlier_fraction", c.room.outlier_fraction, "room");
    take(r, "density", c.room.density, "room");
    take(r, "include_ceiling", c.room.include_ceiling, "room");
    take(r, "seed", c.room.seed, "room");
    if (r.contains("openings")) {
      c.room.openings.clear();
      for (const auto& o : r.at("openings")) c.room.openings.push_back(opening_from(o, "room.openings"));
    }
  }
  if (j.contains("segment")) {
    const auto& s = j.at("segment");
    check_keys(s, {"distance_threshold", "confidence", "max_iterations", "min_inliers", "seed", "orientation",
                   "max_planes"},
               "segment");
    take(s, "distance_threshold", c.segment.msac.distance_threshold, "segment");
    take(s, "confidence", c.segment.msac.confidence, "segment");
    take(s, "max_iterations", c.segment.msac.max_iterations, "segment");
    take(s, "min_inliers", c.segment.msac.min_inliers, "segment");
    take(s, "seed", c.segment.msac.seed, "segment");
    take(s, "max_planes", c.segment.max_planes, "segment");
    if (s.contains("orientation")) {
      const auto& o = s.at("orientation");
      if (o.is_null()) {
        c.segment.msac.orientation.reset();
      } else {
        check_keys(o, {"reference", "max_angle_deg"}, "segment.orientation");
        OrientationConstraint oc;
        std::vector<double> ref{oc.reference.x(), oc.reference.y(), oc.reference.z()};
        take(o, "reference", ref, "segment.orientation");
        if (ref.size() != 3) throw InputError("segment.orientation.reference: expected 3 numbers");
        oc.reference = {ref[0], ref[1], ref[2]};
        take(o, "max_angle_deg", oc.max_angle_deg, "segment.orientation");
        c.segment.msac.orientation = oc;
      }
    }
  }
  if (j.contains("extract")) {
    const auto& e = j.at("extract");
    check_keys(e, {"angle_tol_deg", "height_fraction", "min_ceiling_clearance", "perpendicular_tol_deg", "grid_res",
                   "min_opening_area", "door_min_height", "min_cell_points", "min_island_cells"},
               "extract");
    take(e, "angle_tol_deg", c.extract.labels.angle_tol_deg, "extract");
    take(e, "height_fraction", c.extract.labels.height_fraction, "extract");
    take(e, "min_ceiling_clearance", c.extract.labels.min_ceiling_clearance, "extract");
    take(e, "perpendicular_tol_deg", c.extract.perpendicular_tol_deg, "extract");
    take(e, "grid_res", c.extract.openings.grid_res, "extract");
    take(e, "min_opening_area", c.extract.openings.min_area, "extract");
    take(e, "door_min_height", c.extract.openings.door_min_height, "extract");
    take(e, "min_cell_points", c.extract.openings.min_cell_points, "extract");
    take(e, "min_island_cells", c.extract.openings.min_island_cells, "extract");
  }
  if (j.contains("materials") || j.contains("hvac")) {
    Json p = to_json(c.parameters);
    if (j.contains("materials")) p["materials"] = j.at("materials");
    if (j.contains("hvac")) {
      check_keys(j.at("hvac"), {"cooling_capacity", "air_flow_rate", "supply_temp"}, "hvac");
      for (const auto& [k, v] : j.at("hvac").items()) p["hvac"][k] = v;
    }
    c.parameters = parameters_from_json(p);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, {"h_in", "h_out", "air_capacitance_multiplier", "internal_gain", "floor_exterior"}, "model");
    take(m, "h_in", c.model.h_in, "model");
    take(m, "h_out", c.model.h_out, "model");
    take(m, "air_capacitance_multiplier", c.model.air_capacitance_multiplier, "model");
    take(m, "internal_gain", c.model.internal_gain, "model");
    take(m, "floor_exterior", c.model.floor_exterior, "model");
  }
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    check_keys(s, {"hours", "step_s", "mean_c", "amplitude_c", "peak_hour", "hvac_on_hour", "hvac_off_hour", "t_init_c"},
               "scenario");
    take(s, "hours", c.scenario.hours, "scenario");
    take(s, "step_s", c.scenario.step_s, "scenario");
    take(s, "mean_c", c.scenario.mean_c, "scenario");
    take(s, "amplitude_c", c.scenario.amplitude_c, "scenario");
    take(s, "peak_hour", c.scenario.peak_hour, "scenario");
    take(s, "hvac_on_hour", c.scenario.hvac_on_hour, "scenario");
    take(s, "hvac_off_hour", c.scenario.hvac_off_hour, "scenario");
    take(s, "t_init_c", c.scenario.t_init_c, "scenario");
  }
  if (j.contains("calibration")) {
    const auto& k = j.at("calibration");
    check_keys(k, {"learning_rate", "fd_rel_step", "max_iterations", "rmse_threshold", "min_improvement",
                   "backtrack_factor", "max_halvings", "dt", "burn_in_s", "parallel"},
               "calibration");
    take(k, "learning_rate", c.calibration.learning_rate, "calibration");
    take(k, "fd_rel_step", c.calibration.fd_rel_step, "calibration");
    take(k, "max_iterations", c.calibration.max_iterations, "calibration");
    take(k, "rmse_threshold", c.calibration.rmse_threshold, "calibration");
    take(k, "min_improvement", c.calibration.min_improvement, "calibration");
    take(k, "backtrack_factor", c.calibration.backtrack_factor, "calibration");
    take(k, "max_halvings", c.calibration.max_halvings, "calibration");
    take(k, "dt", c.calibration.dt, "calibration");
    take(k, "burn_in_s", c.calibration.burn_in_s, "calibration");
    take(k, "parallel", c.calibration.parallel, "calibration");
  }
  if (j.contains("parameters")) c.space = space_from_json(j.at("parameters"));
  if (j.contains("watchdog")) {
    const auto& w = j.at("watchdog");
    check_keys(w, {"window_s", "threshold_c", "dt"}, "watchdog");
    take(w, "window_s", c.watchdog.window_s, "watchdog");
    take(w, "threshold_c", c.watchdog.threshold_c, "watchdog");
    take(w, "dt", c.watchdog.dt, "watchdog");
  }
  if (j.contains("pipeline")) {
    const auto& p = j.at("pipeline");
    check_keys(p, {"segmentation_trials", "initial_scale", "output_dir"}, "pipeline");
    take(p, "segmentation_trials", c.pipeline.segmentation_trials, "pipeline");
    take(p, "initial_scale", c.pipeline.initial_scale, "pipeline");
    take(p, "output_dir", c.pipeline.output_dir, "pipeline");
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

}  // namespace roomtherm
