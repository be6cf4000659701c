#pragma once

#include <filesystem>
#include <string>

#include "roomtherm/calibrate.hpp"
#include "roomtherm/io.hpp"
#include "roomtherm/plane_fit.hpp"
#include "roomtherm/pointcloud.hpp"
#include "roomtherm/room_extract.hpp"
#include "roomtherm/scenario.hpp"
#include "roomtherm/thermal.hpp"

namespace roomtherm {

struct SegmentConfig {
  MsacConfig msac;
  std::size_t max_planes = 8;
};

struct PipelineRunConfig {
  std::size_t segmentation_trials = 50;  // seeds room.seed .. room.seed + trials - 1
  double initial_scale = 1.5;            // free parameters are multiplied by this before calibrating
  std::string output_dir = "pipeline_out";
};

struct PipelineConfig {
  SyntheticRoomSpec room = default_room();
  SegmentConfig segment;
  RoomConfig extract;
  ModelParameters parameters;
  ModelDefaults model;
  ScenarioConfig scenario;
  CalibrationConfig calibration;
  ParameterSpace space = ParameterSpace::table1_default();
  WatchdogConfig watchdog;
  PipelineRunConfig pipeline;

  /// 5 x 4 x 3 m, sigma 5 mm, 10% outliers, one window and one door.
  static SyntheticRoomSpec default_room();
  void validate() const;
};

Json to_json(const PipelineConfig& config);

/// Overlays `j` onto `base`; unknown keys anywhere are rejected.
PipelineConfig config_from_json(const Json& j, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace roomtherm
