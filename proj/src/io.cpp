#include "roomtherm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "roomtherm/error.hpp"

namespace roomtherm {
namespace {

Json vec3(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw InputError(where + ": expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InputError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string num(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

void check_keys(const Json& object, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!object.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [key, _] : object.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw InputError(where + ": unknown key '" + key + "'");
    }
  }
}

Json to_json(const GroundTruth& truth) {
  Json surfaces = Json::array();
  for (const auto& s : truth.surfaces) {
    surfaces.push_back({{"name", s.name},
                        {"normal", vec3(s.plane.normal)},
                        {"d", s.plane.d},
                        {"area", s.area},
                        {"point_count", s.point_count}});
  }
  Json openings = Json::array();
  for (const auto& o : truth.openings) {
    openings.push_back({{"wall", o.wall_index}, {"u", o.rect.u}, {"v", o.rect.v}, {"w", o.rect.w}, {"h", o.rect.h}});
  }
  return {{"length", truth.length},
          {"width", truth.width},
          {"height", truth.height},
          {"surfaces", surfaces},
          {"openings", openings},
          {"surface_points", truth.surface_points},
          {"outlier_points", truth.outlier_points}};
}

Json segmentation_report(std::span<const FitResult> planes) {
  Json out = Json::array();
  for (const auto& p : planes) {
    out.push_back({{"normal", vec3(p.plane.normal)},
                   {"d", p.plane.d},
                   {"inlier_count", p.inlier_indices.size()},
                   {"score", p.score}});
  }
  return out;
}

std::vector<PlaneModel> planes_from_report(const Json& report) {
  if (!report.is_array()) throw InputError("planes report: expected an array");
  std::vector<PlaneModel> planes;
  for (std::size_t i = 0; i < report.size(); ++i) {
    const std::string where = "planes[" + std::to_string(i) + "]";
    check_keys(report[i], {"normal", "d", "inlier_count", "score"}, where);
    const Eigen::Vector3d n = vec3_from(report[i].at("normal"), where + ".normal");
    if (!(n.norm() > 0)) throw InputError(where + ": zero normal");
    planes.emplace_back(n, field<double>(report[i], "d", where));
  }
  return planes;
}

Json to_json(const BuildingGeometry& g) {
  Json walls = Json::array();
  for (const auto& w : g.walls) {
    Json openings = Json::array();
    for (const auto& o : w.openings) {
      openings.push_back({{"kind", to_string(o.kind)},
                          {"u", o.rect.u},
                          {"v", o.rect.v},
                          {"w", o.rect.w},
                          {"h", o.rect.h},
                          {"area", o.area()}});
    }
    walls.push_back({{"normal", vec3(w.normal)},
                     {"d", w.d},
                     {"span", w.span},
                     {"height", w.height},
                     {"area", w.net_area()},
                     {"synthesized", w.synthesized},
                     {"openings", openings}});
  }
  return {{"length", g.length},
          {"width", g.width},
          {"height", g.height},
          {"floor_area", g.floor_area()},
          {"roof_area", g.roof_area()},
          {"volume", g.volume()},
          {"walls", walls}};
}

BuildingGeometry geometry_from_json(const Json& j) {
  check_keys(j, {"length", "width", "height", "floor_area", "roof_area", "volume", "walls"}, "geometry");
  BuildingGeometry g;
  g.length = field<double>(j, "length", "geometry");
  g.width = field<double>(j, "width", "geometry");
  g.height = field<double>(j, "height", "geometry");
  const Json walls = field<Json>(j, "walls", "geometry");
  if (!walls.is_array()) throw InputError("geometry.walls: expected an array");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const std::string where = "geometry.walls[" + std::to_string(i) + "]";
    const auto& w = walls[i];
    check_keys(w, {"normal", "d", "span", "height", "area", "synthesized", "openings"}, where);
    WallRecord rec;
    rec.normal = vec3_from(w.at("normal"), where + ".normal");
    rec.d = field<double>(w, "d", where);
    rec.span = field<double>(w, "span", where);
    rec.height = field_or<double>(w, "height", g.height, where);
    rec.synthesized = field_or<bool>(w, "synthesized", false, where);
    for (const auto& o : field_or<Json>(w, "openings", Json::array(), where)) {
      check_keys(o, {"kind", "u", "v", "w", "h", "area"}, where + ".openings");
      rec.openings.push_back({opening_kind_from_string(field<std::string>(o, "kind", where)),
                              {field<double>(o, "u", where), field<double>(o, "v", where),
                               field<double>(o, "w", where), field<double>(o, "h", where)}});
    }
    g.walls.push_back(std::move(rec));
  }
  g.validate();
  return g;
}

Json to_json(const Material& m) {
  return {{"thickness", m.thickness},
          {"conductivity", m.conductivity},
          {"density", m.density},
          {"specific_heat", m.specific_heat}};
}

Material material_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"thickness", "conductivity", "density", "specific_heat"}, where);
  Material m{field<double>(j, "thickness", where), field<double>(j, "conductivity", where),
             field<double>(j, "density", where), field<double>(j, "specific_heat", where)};
  m.validate(where);
  return m;
}

namespace {

Json materials_json(const MaterialSet& materials) {
  Json out = Json::object();
  for (const auto& [element, m] : materials) out[to_string(element)] = to_json(m);
  return out;
}

// Elements absent from the file fall back to `defaults`; listed ones must be complete.
MaterialSet materials_from(const Json& j, MaterialSet defaults, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const Element e = element_from_string(key);
    const Material& base = defaults.count(e) ? defaults.at(e) : Material{};
    Json filled = value;
    if (!filled.contains("density") && base.density > 0) filled["density"] = base.density;
    if (!filled.contains("specific_heat") && base.specific_heat > 0) filled["specific_heat"] = base.specific_heat;
    defaults[e] = material_from_json(filled, where + "." + key);
  }
  return defaults;
}

Json hvac_json(const HvacSpec& h) {
  return {{"cooling_capacity", h.cooling_capacity},
          {"air_flow_rate", h.air_flow_rate},
          {"supply_temp", h.supply_temp}};
}

HvacSpec hvac_from(const Json& j, const HvacSpec& defaults) {
  check_keys(j, {"cooling_capacity", "air_flow_rate", "supply_temp"}, "hvac");
  HvacSpec h{field_or<double>(j, "cooling_capacity", defaults.cooling_capacity, "hvac"),
             field_or<double>(j, "air_flow_rate", defaults.air_flow_rate, "hvac"),
             field_or<double>(j, "supply_temp", defaults.supply_temp, "hvac")};
  h.validate();
  return h;
}

}  // namespace

Json to_json(const ModelParameters& p) { return {{"materials", materials_json(p.materials)}, {"hvac", hvac_json(p.hvac)}}; }

ModelParameters parameters_from_json(const Json& j) {
  check_keys(j, {"materials", "hvac"}, "parameters");
  ModelParameters p;
  if (j.contains("materials")) p.materials = materials_from(j.at("materials"), p.materials, "materials");
  if (j.contains("hvac")) p.hvac = hvac_from(j.at("hvac"), p.hvac);
  return p;
}

Json to_json(const BuildingModel& model) {
  Json surfaces = Json::array();
  for (const auto& s : model.surfaces) {
    surfaces.push_back({{"name", s.name},
                        {"element", to_string(s.element)},
                        {"area", s.area},
                        {"exterior", s.exterior},
                        {"h_in", s.h_in},
                        {"h_out", s.h_out}});
  }
  return {{"zone_volume", model.zone_volume},
          {"air_capacitance_multiplier", model.air_capacitance_multiplier},
          {"internal_gain", model.internal_gain},
          {"materials", materials_json(model.materials)},
          {"hvac", hvac_json(model.hvac)},
          {"surfaces", surfaces}};
}

BuildingModel model_from_json(const Json& j) {
  check_keys(j, {"zone_volume", "air_capacitance_multiplier", "internal_gain", "materials", "hvac", "surfaces"},
             "model");
  BuildingModel m;
  m.zone_volume = field<double>(j, "zone_volume", "model");
  m.air_capacitance_multiplier = field_or<double>(j, "air_capacitance_multiplier", 1.0, "model");
  m.internal_gain = field_or<double>(j, "internal_gain", 0.0, "model");
  m.materials = materials_from(field<Json>(j, "materials", "model"), {}, "model.materials");
  m.hvac = hvac_from(field<Json>(j, "hvac", "model"), HvacSpec{});
  const Json surfaces = field<Json>(j, "surfaces", "model");
  if (!surfaces.is_array()) throw InputError("model.surfaces: expected an array");
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const std::string where = "model.surfaces[" + std::to_string(i) + "]";
    const auto& s = surfaces[i];
    check_keys(s, {"name", "element", "area", "exterior", "h_in", "h_out"}, where);
    m.surfaces.push_back({field_or<std::string>(s, "name", "surface" + std::to_string(i), where),
                          element_from_string(field<std::string>(s, "element", where)), field<double>(s, "area", where),
                          field_or<bool>(s, "exterior", true, where), field_or<double>(s, "h_in", 7.7, where),
                          field_or<double>(s, "h_out", 25.0, where)});
  }
  m.validate();
  return m;
}

Json to_json(const ParameterSpace& space) {
  Json out = Json::array();
  for (const auto& e : space.entries) out.push_back({{"path", e.path}, {"lower", e.lower}, {"upper", e.upper}});
  return out;
}

ParameterSpace space_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("parameter space: expected an array");
  ParameterSpace space;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "parameters[" + std::to_string(i) + "]";
    if (j[i].is_string()) {
      space.entries.push_back(ParameterSpace::with_default_bounds(j[i].get<std::string>()));
      continue;
    }
    check_keys(j[i], {"path", "lower", "upper"}, where);
    auto entry = ParameterSpace::with_default_bounds(field<std::string>(j[i], "path", where));
    entry.lower = field_or<double>(j[i], "lower", entry.lower, where);
    entry.upper = field_or<double>(j[i], "upper", entry.upper, where);
    space.entries.push_back(entry);
  }
  space.validate();
  return space;
}

Json calibration_report(const CalibrationResult& result, const ParameterSpace& space) {
  Json params = Json::array();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& e = space.entries[i];
    params.push_back({{"path", e.path},
                      {"initial", i < result.initial_values.size() ? result.initial_values[i] : NAN},
                      {"calibrated", i < result.calibrated_values.size() ? result.calibrated_values[i] : NAN},
                      {"lower", e.lower},
                      {"upper", e.upper}});
  }
  return {{"parameters", params},
          {"final_rmse_c", result.final_rmse},
          {"iterations", result.iterations},
          {"stop_reason", to_string(result.reason)},
          {"history", result.objective_history}};
}

WeatherSeries SeriesTable::weather() const {
  if (t_out_c.size() != time_s.size()) throw InputError("series has no t_out_c column");
  return {time_s, t_out_c};
}

Trace SeriesTable::trace() const {
  if (t_zone_c.size() != time_s.size()) throw InputError("series has no t_zone_c column");
  if (hvac_on.size() != time_s.size()) throw InputError("series has no hvac_on column");
  return {time_s, t_zone_c, hvac_on};
}

SeriesTable read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw ParseError(path.string(), line_no, "missing header");
  enum Column { Time, TOut, TZone, Hvac };
  std::vector<Column> columns;
  for (const auto& h : header) {
    if (h == "time_s") columns.push_back(Time);
    else if (h == "t_out_c") columns.push_back(TOut);
    else if (h == "t_zone_c") columns.push_back(TZone);
    else if (h == "hvac_on") columns.push_back(Hvac);
    else throw ParseError(path.string(), line_no, "unknown column '" + h + "'");
  }
  if (std::find(columns.begin(), columns.end(), Time) == columns.end()) {
    throw ParseError(path.string(), line_no, "missing time_s column");
  }

  SeriesTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != columns.size()) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(columns.size()) + " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto& cell = cells[c];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(path.string(), line_no, "non-numeric value '" + cell + "'");
      }
      switch (columns[c]) {
        case Time: table.time_s.push_back(v); break;
        case TOut: table.t_out_c.push_back(v); break;
        case TZone: table.t_zone_c.push_back(v); break;
        case Hvac:
          if (v != 0.0 && v != 1.0) throw ParseError(path.string(), line_no, "hvac_on must be 0 or 1");
          table.hvac_on.push_back(v == 1.0);
          break;
      }
    }
    if (table.time_s.size() > 1 && !(table.time_s.back() > table.time_s[table.time_s.size() - 2])) {
      throw ParseError(path.string(), line_no, "time_s not strictly increasing");
    }
  }
  return table;
}

void write_weather_csv(const std::filesystem::path& path, const WeatherSeries& weather, const HvacSchedule* schedule) {
  auto out = open_out(path);
  out << "time_s,t_out_c" << (schedule ? ",hvac_on" : "") << '\n';
  for (std::size_t i = 0; i < weather.size(); ++i) {
    out << num(weather.timestamps[i]) << ',' << num(weather.t_out[i]);
    if (schedule) out << ',' << ((*schedule)[i] ? 1 : 0);
    out << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace, const WeatherSeries& weather) {
  if (trace.size() != weather.size()) throw InputError("trace and weather differ in length");
  auto out = open_out(path);
  out << "time_s,t_out_c,t_zone_c,hvac_on\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << num(trace.timestamps[i]) << ',' << num(weather.t_out[i]) << ',' << num(trace.t_zone[i]) << ','
        << (trace.hvac_on[i] ? 1 : 0) << '\n';
  }
}

void write_events_csv(const std::filesystem::path& path, const std::vector<RecalibrationEvent>& events) {
  auto out = open_out(path);
  out << "time_s,pre_rmse_c,post_rmse_c,status\n";
  for (const auto& e : events) {
    out << num(e.time_s) << ',' << num(e.pre_rmse) << ',' << num(e.post_rmse) << ','
        << (e.degraded ? "degraded" : "recalibrated") << '\n';
  }
}

void write_gnuplot(const std::filesystem::path& prefix, const Trace& simulated, const Trace* observed,
                   const WeatherSeries& weather, const Trace* initial) {
  const auto dat = std::filesystem::path(prefix.string() + ".dat");
  const auto gp = std::filesystem::path(prefix.string() + ".gp");
  {
    auto out = open_out(dat);
    out << "# hour t_out simulated observed initial hvac_on\n";
    for (std::size_t i = 0; i < simulated.size(); ++i) {
      out << num(simulated.timestamps[i] / 3600.0) << ' ' << num(weather.t_out[i]) << ' ' << num(simulated.t_zone[i])
          << ' ' << (observed ? num(observed->t_zone[i]) : "NaN") << ' ' << (initial ? num(initial->t_zone[i]) : "NaN")
          << ' ' << (simulated.hvac_on[i] ? 1 : 0) << '\n';
    }
  }
  auto out = open_out(gp);
  const auto name = dat.filename().string();
  out << "set terminal pngcairo size 1000,600\n"
      << "set output '" << prefix.filename().string() << ".png'\n"
      << "set multiplot layout 2,1 heights 0.8,0.2\n"
      << "set ylabel 'Temperature (C)'\nset key outside top center horizontal\n"
      << "plot '" << name << "' u 1:2 w l dt 2 t 'Outdoor', '" << name << "' u 1:3 w l lw 2 t 'Simulated'";
  if (observed) out << ", '" << name << "' u 1:4 w l t 'Actual'";
  if (initial) out << ", '" << name << "' u 1:5 w l dt 3 t 'Initial model'";
  out << "\nset ylabel 'HVAC'\nset xlabel 'Hour'\nset yrange [-0.1:1.1]\nunset key\n"
      << "plot '" << name << "' u 1:6 w steps lw 3\nunset multiplot\n";
}

}  // namespace roomtherm
