#include <cmath>

#include "roomtherm/calibrate.hpp"

namespace roomtherm {

Watchdog::Watchdog(BuildingModel model, ParameterSpace space, CalibrationConfig calibration, WatchdogConfig config)
    : model_(std::move(model)),
      space_(std::move(space)),
      calibration_(calibration),
      config_(config),
      sim_(model_) {
  if (!(config_.window_s > 0)) throw InputError("watchdog window must be > 0");
  if (!(config_.threshold_c > 0)) throw InputError("watchdog threshold must be > 0");
  if (!(config_.dt > 0)) throw InputError("watchdog dt must be > 0");
  calibration_.validate();
}

double Watchdog::rolling_rmse() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : window_) {
    if (!s.scored) continue;
    const double e = s.simulated - s.observed;
    sum += e * e;
    ++n;
  }
  return n == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n));
}

void Watchdog::trim(double now) {
  std::size_t drop = 0;
  while (drop < window_.size() && window_[drop].time < now - config_.window_s) ++drop;
  window_.erase(window_.begin(), window_.begin() + static_cast<std::ptrdiff_t>(drop));
}

std::optional<RecalibrationEvent> Watchdog::push(double time_s, double t_out, double t_zone, bool hvac_on) {
  if (!std::isfinite(time_s) || !std::isfinite(t_out) || !std::isfinite(t_zone)) {
    throw InputError("watchdog: non-finite sample at t = " + std::to_string(time_s));
  }
  if (!window_.empty() && !(time_s > window_.back().time)) {
    throw InputError("watchdog: out-of-order timestamp " + std::to_string(time_s) + " after " +
                     std::to_string(window_.back().time));
  }
  if (!first_time_) {
    first_time_ = time_s;
    sim_.reset(t_zone);
  } else {
    const auto& prev = window_.back();
    sim_.advance(prev.t_out, prev.hvac_on, time_s - prev.time, config_.dt);
  }
  window_.push_back({time_s, t_out, t_zone, sim_.zone_temperature(), hvac_on, true, sim_.state()});
  trim(time_s);

  const bool window_full = time_s - *first_time_ >= config_.window_s;
  const bool cooled_down = !last_event_ || time_s - *last_event_ >= config_.window_s;
  if (!window_full || !cooled_down) return std::nullopt;
  const double rmse = rolling_rmse();
  if (!(rmse > config_.threshold_c)) return std::nullopt;
  events_.push_back(recalibrate(time_s, rmse));
  return events_.back();
}

RecalibrationEvent Watchdog::recalibrate(double now, double pre_rmse) {
  Trace observed;
  WeatherSeries weather;
  for (const auto& s : window_) {
    observed.timestamps.push_back(s.time);
    observed.t_zone.push_back(s.observed);
    observed.hvac_on.push_back(s.hvac_on);
    weather.timestamps.push_back(s.time);
    weather.t_out.push_back(s.t_out);
  }
  const Eigen::VectorXd start_state = window_.front().state;

  // The tracked nodal state is a warm start, so the whole window is scored.
  CalibrationConfig cfg = calibration_;
  cfg.burn_in_s = 0.0;
  cfg.dt = config_.dt;

  RecalibrationEvent event{now, pre_rmse, pre_rmse, false, 0};
  try {
    const auto result = calibrate(model_, space_, observed, weather, cfg, start_state);
    model_ = result.model;
    event.iterations = result.iterations;
  } catch (const CalibrationStall&) {
    event.degraded = true;
    last_event_ = now;
    return event;
  }

  std::vector<Eigen::VectorXd> states;
  const Trace resimulated = simulate_from_state(model_, weather, observed.hvac_on, config_.dt, start_state, &states);
  for (std::size_t i = 0; i < window_.size(); ++i) {
    window_[i].simulated = resimulated.t_zone[i];
    window_[i].state = states[i];
  }
  sim_ = Simulator(model_);
  sim_.reset(states.back());
  event.post_rmse = rolling_rmse();
  last_event_ = now;
  return event;
}

std::vector<RecalibrationEvent> watchdog(const BuildingModel& model, const Trace& observed,
                                         const WeatherSeries& weather, const ParameterSpace& space,
                                         const CalibrationConfig& calibration, const WatchdogConfig& config,
                                         BuildingModel* final_model) {
  if (observed.size() != weather.size()) throw InputError("alignment: stream and weather differ in length");
  Watchdog dog(model, space, calibration, config);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (std::abs(observed.timestamps[i] - weather.timestamps[i]) > 1e-6) {
      throw InputError("alignment: timestamp mismatch at row " + std::to_string(i));
    }
    dog.push(observed.timestamps[i], weather.t_out[i], observed.t_zone[i], observed.hvac_on[i]);
  }
  if (final_model) *final_model = dog.model();
  return dog.events();
}

}  // namespace roomtherm
