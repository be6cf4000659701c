#include "roomtherm/scenario.hpp"

#include <cmath>

#include "roomtherm/error.hpp"

namespace roomtherm {

WeatherSeries sinusoidal_weather(double hours, double step_s, double mean_c, double amplitude_c, double peak_hour) {
  if (!(hours > 0) || !(step_s > 0)) throw InputError("weather horizon and step must be > 0");
  WeatherSeries w;
  const auto samples = static_cast<std::size_t>(std::floor(hours * 3600.0 / step_s + 1e-9)) + 1;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) * step_s;
    w.timestamps.push_back(t);
    w.t_out.push_back(mean_c + amplitude_c * std::cos(2.0 * M_PI * (t / 3600.0 - peak_hour) / 24.0));
  }
  return w;
}

HvacSchedule daytime_schedule(const std::vector<double>& timestamps, double on_hour, double off_hour) {
  HvacSchedule s;
  s.reserve(timestamps.size());
  for (double t : timestamps) {
    const double hour = std::fmod(t / 3600.0, 24.0);
    s.push_back(hour >= on_hour && hour < off_hour);
  }
  return s;
}

Trace simulate_thermostat(const BuildingModel& model, const WeatherSeries& weather, double setpoint_c, double dt,
                          double t_init, double band_c) {
  weather.validate();
  Simulator sim(model);
  sim.reset(t_init);
  Trace trace;
  bool on = false;
  for (std::size_t k = 0; k < weather.size(); ++k) {
    if (k > 0) {
      sim.advance(weather.t_out[k - 1], on, weather.timestamps[k] - weather.timestamps[k - 1], dt);
    }
    const double t = sim.zone_temperature();
    if (t > setpoint_c + band_c) on = true;
    if (t < setpoint_c - band_c) on = false;
    trace.timestamps.push_back(weather.timestamps[k]);
    trace.t_zone.push_back(t);
    trace.hvac_on.push_back(on);
  }
  return trace;
}

WeatherSeries ScenarioConfig::weather() const {
  return sinusoidal_weather(hours, step_s, mean_c, amplitude_c, peak_hour);
}

HvacSchedule ScenarioConfig::schedule(const WeatherSeries& w) const {
  return daytime_schedule(w.timestamps, hvac_on_hour, hvac_off_hour);
}

RecoveryExperiment make_recovery_experiment(const BuildingModel& truth, const ScenarioConfig& scenario,
                                            const ParameterSpace& space, double scale, double dt) {
  RecoveryExperiment e{truth, truth, scenario.weather(), {}};
  e.observed = simulate(truth, e.weather, scenario.schedule(e.weather), dt, scenario.t_init_c);
  for (const auto& entry : space.entries) set_parameter(e.initial, entry.path, get_parameter(truth, entry.path) * scale);
  return e;
}

BuildingModel hot_office_model(const MaterialSet& materials, const HvacSpec& hvac) {
  const std::vector<SyntheticOpening> openings = {{0, {1.0, 1.0, 2.0, 1.5}},
                                                  {0, {5.0, 1.0, 2.0, 1.5}},
                                                  {2, {3.0, 1.0, 2.0, 1.5}},
                                                  {1, {1.0, 0.0, 0.9, 2.0}}};
  ModelDefaults defaults;
  defaults.internal_gain = 2500.0;
  return build_model(box_geometry(12.0, 8.0, 3.5, openings), materials, hvac, defaults);
}

ScenarioConfig hot_office_scenario() {
  ScenarioConfig s;
  s.mean_c = 38.0;
  s.amplitude_c = 6.0;
  s.t_init_c = 38.0;
  return s;
}

Trace drift_stream(const BuildingModel& before, const BuildingModel& after, double change_time_s,
                   const WeatherSeries& weather, const HvacSchedule& schedule, double dt, double t_init) {
  weather.validate();
  if (schedule.size() != weather.size()) throw InputError("alignment: schedule and weather differ in length");
  Simulator sim(before);
  sim.reset(t_init);
  bool switched = false;
  Trace trace;
  for (std::size_t k = 0; k < weather.size(); ++k) {
    if (k > 0) {
      if (!switched && weather.timestamps[k - 1] >= change_time_s) {
        const Eigen::VectorXd state = sim.state();
        sim = Simulator(after);
        sim.reset(state);
        switched = true;
      }
      sim.advance(weather.t_out[k - 1], schedule[k - 1], weather.timestamps[k] - weather.timestamps[k - 1], dt);
    }
    trace.timestamps.push_back(weather.timestamps[k]);
    trace.t_zone.push_back(sim.zone_temperature());
    trace.hvac_on.push_back(schedule[k]);
  }
  return trace;
}

}  // namespace roomtherm
