#pragma once

#include "roomtherm/thermal.hpp"
#include "roomtherm/calibrate.hpp"

namespace roomtherm {

/// Daily cosine outdoor temperature, hottest at `peak_hour`, sampled every
/// `step_s` seconds over `hours` hours (both ends included).
WeatherSeries sinusoidal_weather(double hours, double step_s, double mean_c, double amplitude_c,
                                 double peak_hour = 15.0);

/// HVAC on between on_hour (inclusive) and off_hour (exclusive) each day.
HvacSchedule daytime_schedule(const std::vector<double>& timestamps, double on_hour = 8.0, double off_hour = 18.0);

/// Deadband thermostat for synthetic data: switches on above
/// setpoint + band, off below setpoint - band, decided at each sample.
Trace simulate_thermostat(const BuildingModel& model, const WeatherSeries& weather, double setpoint_c, double dt,
                          double t_init, double band_c = 0.5);

/// Synthetic weather, HVAC schedule and initial temperature used to make an
/// observed trace.
struct ScenarioConfig {
  double hours = 48.0;
  double step_s = 300.0;
  double mean_c = 32.0;
  double amplitude_c = 6.0;
  double peak_hour = 15.0;
  double hvac_on_hour = 8.0;
  double hvac_off_hour = 18.0;
  double t_init_c = 30.0;

  WeatherSeries weather() const;
  HvacSchedule schedule(const WeatherSeries& weather) const;
};

/// Observed trace of `truth` under a scenario, plus a perturbed starting
/// model whose free parameters are scaled by `scale`.
struct RecoveryExperiment {
  BuildingModel truth;
  BuildingModel initial;
  WeatherSeries weather;
  Trace observed;
};
RecoveryExperiment make_recovery_experiment(const BuildingModel& truth, const ScenarioConfig& scenario,
                                            const ParameterSpace& space, double scale, double dt);

/// A 12 x 8 x 3.5 m office with three windows, a door and 2.5 kW of internal
/// gain in a hot climate (38 +/- 6 C). The reference HVAC runs at its
/// cooling capacity for much of each day, which the small reference room
/// never does.
BuildingModel hot_office_model(const MaterialSet& materials = table1_materials(), const HvacSpec& hvac = table1_hvac());
ScenarioConfig hot_office_scenario();

/// Zone temperatures sampled at the weather timestamps, switching from
/// `before` to `after` at `change_time_s` with the nodal state carried over.
Trace drift_stream(const BuildingModel& before, const BuildingModel& after, double change_time_s,
                   const WeatherSeries& weather, const HvacSchedule& schedule, double dt, double t_init);

}  // namespace roomtherm
