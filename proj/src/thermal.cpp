#include "roomtherm/thermal.hpp"

#include <algorithm>
#include <cmath>

#include "roomtherm/error.hpp"

namespace roomtherm {

std::string to_string(Element element) {
  switch (element) {
    case Element::Walls: return "walls";
    case Element::Windows: return "windows";
    case Element::Door: return "door";
    case Element::Roof: return "roof";
    case Element::Floor: return "floor";
  }
  return "walls";
}

Element element_from_string(const std::string& s) {
  if (s == "walls") return Element::Walls;
  if (s == "windows") return Element::Windows;
  if (s == "door") return Element::Door;
  if (s == "roof") return Element::Roof;
  if (s == "floor") return Element::Floor;
  throw InputError("unknown element '" + s + "' (expected walls, windows, door, roof or floor)");
}

void Material::validate(const std::string& name) const {
  if (!(thickness > 0 && conductivity > 0 && density > 0 && specific_heat > 0)) {
    throw InputError("material " + name + ": thickness, conductivity, density and specific_heat must be > 0");
  }
}

void HvacSpec::validate() const {
  if (!(cooling_capacity >= 0)) throw InputError("hvac.cooling_capacity must be >= 0");
  if (!(air_flow_rate >= 0)) throw InputError("hvac.air_flow_rate must be >= 0");
  if (!std::isfinite(supply_temp)) throw InputError("hvac.supply_temp must be finite");
}

const Material& BuildingModel::material(const SurfaceSpec& s) const {
  const auto it = materials.find(s.element);
  if (it == materials.end()) throw InputError("no material for element " + to_string(s.element));
  return it->second;
}

void BuildingModel::validate() const {
  if (!(zone_volume > 0)) throw InputError("zone_volume must be > 0");
  if (!(air_capacitance_multiplier > 0)) throw InputError("air_capacitance_multiplier must be > 0");
  if (!std::isfinite(internal_gain)) throw InputError("internal_gain must be finite");
  if (surfaces.empty()) throw InputError("model needs at least one surface");
  for (const auto& [element, m] : materials) m.validate(to_string(element));
  for (const auto& s : surfaces) {
    if (!(s.area > 0)) throw InputError("surface " + s.name + ": area must be > 0");
    if (!(s.h_in > 0 && s.h_out > 0)) throw InputError("surface " + s.name + ": film coefficients must be > 0");
    material(s);
  }
  hvac.validate();
}

void WeatherSeries::validate() const {
  if (timestamps.size() != t_out.size()) throw InputError("weather: timestamps and t_out differ in length");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!std::isfinite(timestamps[i]) || !std::isfinite(t_out[i])) {
      throw InputError("weather: non-finite value at row " + std::to_string(i));
    }
    if (i > 0 && !(timestamps[i] > timestamps[i - 1])) {
      throw InputError("weather: timestamps not strictly increasing at row " + std::to_string(i));
    }
  }
}

void Trace::validate() const {
  if (timestamps.size() != t_zone.size() || timestamps.size() != hvac_on.size()) {
    throw InputError("trace: column lengths differ");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (!std::isfinite(t_zone[i]) || !std::isfinite(timestamps[i])) {
      throw InputError("trace: non-finite value at row " + std::to_string(i));
    }
    if (i > 0 && !(timestamps[i] > timestamps[i - 1])) {
      throw InputError("trace: timestamps not strictly increasing at row " + std::to_string(i));
    }
  }
}

MaterialSet table1_materials() {
  return {
      {Element::Walls, {0.30, 0.311, 1400.0, 1000.0}},
      {Element::Windows, {0.0031, 0.85, 2500.0, 840.0}},
      {Element::Door, {0.0254, 0.15, 600.0, 1600.0}},
      {Element::Roof, {0.1016, 0.53, 1100.0, 1000.0}},
      {Element::Floor, {0.10, 1.13, 2000.0, 1000.0}},
  };
}

HvacSpec table1_hvac() { return {8943.0, 0.384, 14.0}; }

BuildingModel build_model(const BuildingGeometry& geometry, const MaterialSet& materials, const HvacSpec& hvac,
                          const ModelDefaults& defaults) {
  for (auto e : {Element::Walls, Element::Windows, Element::Door, Element::Roof, Element::Floor}) {
    if (!materials.count(e)) throw InputError("missing material for element " + to_string(e));
  }
  if (geometry.walls.empty()) throw GeometryError("geometry has no wall surfaces");
  geometry.validate();

  BuildingModel model;
  model.zone_volume = geometry.volume();
  model.air_capacitance_multiplier = defaults.air_capacitance_multiplier;
  model.materials = materials;
  model.hvac = hvac;
  model.internal_gain = defaults.internal_gain;

  auto add = [&](std::string name, Element element, double area, bool exterior) {
    model.surfaces.push_back({std::move(name), element, area, exterior, defaults.h_in, defaults.h_out});
  };
  for (std::size_t i = 0; i < geometry.walls.size(); ++i) {
    const auto& wall = geometry.walls[i];
    const std::string base = "wall" + std::to_string(i);
    if (wall.net_area() > 1e-12) add(base, Element::Walls, wall.net_area(), true);
    for (std::size_t j = 0; j < wall.openings.size(); ++j) {
      const auto& o = wall.openings[j];
      const bool door = o.kind == OpeningKind::Door;
      add(base + (door ? "_door" : "_window") + std::to_string(j), door ? Element::Door : Element::Windows, o.area(),
          true);
    }
  }
  add("roof", Element::Roof, geometry.roof_area(), true);
  add("floor", Element::Floor, geometry.floor_area(), defaults.floor_exterior);
  model.validate();
  return model;
}

double hvac_power(const HvacSpec& hvac, double t_zone, bool on) {
  if (!on || t_zone <= hvac.supply_temp) return 0.0;
  const double flow_limited = kAirDensity * kAirSpecificHeat * hvac.air_flow_rate * (t_zone - hvac.supply_temp);
  return -std::min(hvac.cooling_capacity, flow_limited);
}

SurfaceNetwork surface_network(const BuildingModel& model, const SurfaceSpec& s) {
  const Material& m = model.material(s);
  const double half_conduction = m.thickness / (2.0 * m.conductivity * s.area);
  return {1.0 / (half_conduction + 1.0 / (s.h_in * s.area)), 1.0 / (1.0 / (s.h_out * s.area) + half_conduction),
          m.density * m.specific_heat * m.thickness * s.area};
}

double total_exterior_conductance(const BuildingModel& model) {
  double g = 0.0;
  for (const auto& s : model.surfaces) {
    if (!s.exterior) continue;
    const auto net = surface_network(model, s);
    g += 1.0 / (1.0 / net.g_in + 1.0 / net.g_out);
  }
  return g;
}

double steady_state(const BuildingModel& model, double t_out, double hvac_power_w, double gains_w) {
  const double g = total_exterior_conductance(model);
  const double power = hvac_power_w + gains_w;
  if (g <= 0.0) {
    if (power != 0.0) throw StageError("steady state unbounded: no exterior conductance with nonzero power");
    return t_out;
  }
  return t_out + power / g;
}

ThermalNetwork::ThermalNetwork(const BuildingModel& model) {
  const auto n = static_cast<Eigen::Index>(model.surfaces.size() + 1);
  capacitance = Eigen::VectorXd::Zero(n);
  conductance = Eigen::MatrixXd::Zero(n, n);
  to_outdoor = Eigen::VectorXd::Zero(n);
  capacitance[0] = model.zone_capacitance();
  for (Eigen::Index i = 1; i < n; ++i) {
    const auto& s = model.surfaces[static_cast<std::size_t>(i - 1)];
    const auto net = surface_network(model, s);
    capacitance[i] = net.capacitance;
    const double to_zone = s.exterior ? net.g_in : net.g_in + net.g_out;
    conductance(i, i) += to_zone;
    conductance(0, 0) += to_zone;
    conductance(i, 0) -= to_zone;
    conductance(0, i) -= to_zone;
    if (s.exterior) {
      conductance(i, i) += net.g_out;
      to_outdoor[i] = net.g_out;
    }
  }
}

namespace {

const BuildingModel& validated(const BuildingModel& model) {
  model.validate();
  return model;
}

}  // namespace

Simulator::Simulator(BuildingModel model) : model_(std::move(model)), network_(validated(model_)) { reset(20.0); }

void Simulator::reset(double t_init) {
  state_ = Eigen::VectorXd::Constant(network_.nodes(), t_init);
  last_hvac_ = 0.0;
}

void Simulator::reset(const Eigen::VectorXd& state) {
  if (state.size() != network_.nodes()) {
    throw InputError("initial state has " + std::to_string(state.size()) + " nodes, model has " +
                     std::to_string(network_.nodes()));
  }
  state_ = state;
  last_hvac_ = 0.0;
}

const Simulator::Factor& Simulator::factor_for(double h) {
  for (const auto& f : factors_) {
    if (f.h == h) return f;
  }
  if (factors_.size() >= 8) factors_.erase(factors_.begin());
  Eigen::MatrixXd system = network_.conductance;
  system.diagonal() += network_.capacitance / h;
  Factor f{h, Eigen::LLT<Eigen::MatrixXd>(system), {}};
  if (f.llt.info() != Eigen::Success) throw SimulationFault(steps_, "thermal system is not positive definite");
  f.unit_response = f.llt.solve(Eigen::VectorXd::Unit(network_.nodes(), 0));
  factors_.push_back(std::move(f));
  return factors_.back();
}

double Simulator::step(double t_out, bool hvac_on, double h) {
  const Factor& f = factor_for(h);
  Eigen::VectorXd rhs = network_.capacitance.cwiseProduct(state_) / h + network_.to_outdoor * t_out;
  rhs[0] += model_.internal_gain;
  const Eigen::VectorXd free_state = f.llt.solve(rhs);

  // The zone temperature is affine in the HVAC power, T = T_free + beta * Q,
  // and Q(T) is piecewise linear; pick the regime consistent with the result.
  double q = 0.0;
  const double t_free = free_state[0];
  const auto& hv = model_.hvac;
  if (hvac_on && t_free > hv.supply_temp) {
    const double beta = f.unit_response[0];
    const double k = kAirDensity * kAirSpecificHeat * hv.air_flow_rate;
    const double t_linear = (t_free + beta * k * hv.supply_temp) / (1.0 + beta * k);
    const double q_linear = -k * (t_linear - hv.supply_temp);
    q = -q_linear <= hv.cooling_capacity ? q_linear : -hv.cooling_capacity;
  }
  state_ = free_state + q * f.unit_response;
  last_hvac_ = q;
  ++steps_;
  if (!state_.allFinite()) throw SimulationFault(steps_, "non-finite nodal temperature");
  return state_[0];
}

double Simulator::advance(double t_out, bool hvac_on, double interval, double dt) {
  const auto substeps = std::max<long>(1, static_cast<long>(std::ceil(interval / dt - 1e-9)));
  const double h = interval / static_cast<double>(substeps);
  for (long i = 0; i < substeps; ++i) step(t_out, hvac_on, h);
  return state_[0];
}

namespace {

void check_inputs(const WeatherSeries& weather, const HvacSchedule& schedule, double dt) {
  weather.validate();
  if (weather.size() == 0) throw InputError("weather series is empty");
  if (schedule.size() != weather.size()) {
    throw InputError("schedule has " + std::to_string(schedule.size()) + " entries, weather has " +
                     std::to_string(weather.size()));
  }
  if (!(dt > 0) || !std::isfinite(dt)) throw InputError("dt must be > 0");
}

}  // namespace

Trace simulate_from_state(const BuildingModel& model, const WeatherSeries& weather, const HvacSchedule& schedule,
                          double dt, const Eigen::VectorXd& initial_state, std::vector<Eigen::VectorXd>* states) {
  check_inputs(weather, schedule, dt);
  Simulator sim(model);
  sim.reset(initial_state);
  Trace trace;
  trace.timestamps = weather.timestamps;
  trace.hvac_on = schedule;
  trace.t_zone.reserve(weather.size());
  trace.t_zone.push_back(sim.zone_temperature());
  if (states) {
    states->clear();
    states->push_back(sim.state());
  }
  for (std::size_t k = 0; k + 1 < weather.size(); ++k) {
    const double interval = weather.timestamps[k + 1] - weather.timestamps[k];
    trace.t_zone.push_back(sim.advance(weather.t_out[k], schedule[k], interval, dt));
    if (states) states->push_back(sim.state());
  }
  return trace;
}

Trace simulate(const BuildingModel& model, const WeatherSeries& weather, const HvacSchedule& schedule, double dt,
               double t_init) {
  if (!std::isfinite(t_init)) throw InputError("t_init must be finite");
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(model.surfaces.size() + 1), t_init);
  return simulate_from_state(model, weather, schedule, dt, x0);
}

ResidualReport energy_residual(const BuildingModel& model, const Trace& trace, const WeatherSeries& weather,
                               const HvacSchedule& schedule, double dt) {
  check_inputs(weather, schedule, dt);
  trace.validate();
  if (trace.size() != weather.size()) throw InputError("trace and weather differ in length");
  model.validate();

  const std::size_t n = model.surfaces.size();
  std::vector<SurfaceNetwork> nets;
  for (const auto& s : model.surfaces) nets.push_back(surface_network(model, s));
  std::vector<double> surface_t(n, trace.t_zone[0]);
  const double c_zone = model.zone_capacitance();

  ResidualReport report;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const double h = weather.timestamps[k + 1] - weather.timestamps[k];
    if (h > dt * (1.0 + 1e-9)) {
      throw InputError("energy_residual needs one sample per step; interval " + std::to_string(h) + " s > dt");
    }
    const double tz_old = trace.t_zone[k];
    const double tz = trace.t_zone[k + 1];
    const double t_out = weather.t_out[k];

    double into_zone = 0.0;
    double peak = std::abs(c_zone / h * (tz - tz_old));
    for (std::size_t s = 0; s < n; ++s) {
      const auto& net = nets[s];
      const double to_zone = model.surfaces[s].exterior ? net.g_in : net.g_in + net.g_out;
      const double to_out = model.surfaces[s].exterior ? net.g_out : 0.0;
      const double c_h = net.capacitance / h;
      surface_t[s] = (c_h * surface_t[s] + to_zone * tz + to_out * t_out) / (c_h + to_zone + to_out);
      const double flow = to_zone * (surface_t[s] - tz);
      into_zone += flow;
      peak = std::max(peak, std::abs(flow));
    }
    const double q = hvac_power(model.hvac, tz, schedule[k]);
    peak = std::max({peak, std::abs(q), std::abs(model.internal_gain)});
    const double residual = std::abs(c_zone / h * (tz - tz_old) - (into_zone + q + model.internal_gain));
    report.peak_flux = std::max(report.peak_flux, peak);
    if (residual > report.max_residual) {
      report.max_residual = residual;
      report.worst_step = k + 1;
    }
  }
  return report;
}

}  // namespace roomtherm
