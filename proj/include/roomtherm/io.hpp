#pragma once

#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomtherm/calibrate.hpp"
#include "roomtherm/geometry.hpp"
#include "roomtherm/plane_fit.hpp"
#include "roomtherm/pointcloud.hpp"
#include "roomtherm/thermal.hpp"

namespace roomtherm {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);

/// Throws InputError when `object` has a key outside `allowed`.
void check_keys(const Json& object, std::initializer_list<const char*> allowed, const std::string& where);

Json to_json(const GroundTruth& truth);

/// [{normal: [x, y, z], d, inlier_count, score}, ...] in extraction order.
Json segmentation_report(std::span<const FitResult> planes);
std::vector<PlaneModel> planes_from_report(const Json& report);

Json to_json(const BuildingGeometry& geometry);
BuildingGeometry geometry_from_json(const Json& j);

Json to_json(const Material& m);
Material material_from_json(const Json& j, const std::string& where);

/// Materials per element plus the HVAC spec: the parameter table of a room.
struct ModelParameters {
  MaterialSet materials = table1_materials();
  HvacSpec hvac = table1_hvac();
};
Json to_json(const ModelParameters& p);
ModelParameters parameters_from_json(const Json& j);

Json to_json(const BuildingModel& model);
BuildingModel model_from_json(const Json& j);

Json to_json(const ParameterSpace& space);
ParameterSpace space_from_json(const Json& j);

Json calibration_report(const CalibrationResult& result, const ParameterSpace& space);

/// Columns of a time-series CSV; `time_s` is mandatory, the rest optional.
struct SeriesTable {
  std::vector<double> time_s;
  std::vector<double> t_out_c;
  std::vector<double> t_zone_c;
  HvacSchedule hvac_on;

  bool has_t_out() const { return !t_out_c.empty() || time_s.empty(); }
  WeatherSeries weather() const;
  Trace trace() const;
};

SeriesTable read_series_csv(const std::filesystem::path& path);
void write_weather_csv(const std::filesystem::path& path, const WeatherSeries& weather,
                       const HvacSchedule* schedule = nullptr);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace, const WeatherSeries& weather);
void write_events_csv(const std::filesystem::path& path, const std::vector<RecalibrationEvent>& events);

/// Gnuplot data + script overlaying observed and simulated temperature with
/// the HVAC status strip. Writes <prefix>.dat and <prefix>.gp.
void write_gnuplot(const std::filesystem::path& prefix, const Trace& simulated, const Trace* observed,
                   const WeatherSeries& weather, const Trace* initial = nullptr);

}  // namespace roomtherm
