#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "roomtherm/error.hpp"
#include "roomtherm/thermal.hpp"

namespace roomtherm {

/// A free model parameter addressed by path ("walls.conductivity",
/// "hvac.cooling_capacity", ...) with positive box bounds.
struct ParameterEntry {
  std::string path;
  double lower = 0.0;
  double upper = 0.0;
};

struct ParameterSpace {
  std::vector<ParameterEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  /// Conductivity of walls, windows, door and roof plus cooling capacity and air flow.
  static ParameterSpace table1_default();
  /// Default bounds for a single path.
  static ParameterEntry with_default_bounds(const std::string& path);

  /// Throws InputError on bad bounds, unknown or duplicate paths.
  void validate() const;
};

double get_parameter(const BuildingModel& model, const std::string& path);
void set_parameter(BuildingModel& model, const std::string& path, double value);

struct CalibrationConfig {
  double learning_rate = 0.1;  // step on the log-parameter gradient
  double fd_rel_step = 1e-4;
  std::size_t max_iterations = 500;
  double rmse_threshold = 0.3;  // degC
  double min_improvement = 1e-4;
  double backtrack_factor = 0.5;
  std::size_t max_halvings = 10;
  double dt = 60.0;           // simulation step, s
  double burn_in_s = 3600.0;  // samples before this offset are not scored
  bool parallel = true;

  void validate() const;
};

/// How the objective simulates the observed period.
struct ObjectiveOptions {
  double dt = 60.0;
  double burn_in_s = 3600.0;
  std::optional<double> t_init;                  // default: first observed temperature
  std::optional<Eigen::VectorXd> initial_state;  // overrides t_init
};

/// RMSE in degC between simulated and observed zone temperature, driven by
/// the observed HVAC status.
double objective(const BuildingModel& model, const Trace& observed, const WeatherSeries& weather,
                 const ObjectiveOptions& options = {});

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// Central differences with step rel_step * max(|theta_i|, 1).
Eigen::VectorXd fd_gradient(const ScalarFunction& f, const Eigen::VectorXd& theta, double rel_step,
                            bool parallel = false);

enum class StopReason { Threshold, MinImprovement, MaxIterations, NoDescent };

std::string to_string(StopReason reason);

struct CalibrationResult {
  BuildingModel model;
  double final_rmse = 0.0;
  std::size_t iterations = 0;
  std::vector<double> objective_history;
  StopReason reason = StopReason::MaxIterations;
  std::vector<double> initial_values;
  std::vector<double> calibrated_values;
  Eigen::VectorXd last_gradient;
};

/// No descent direction at the first iteration while still above threshold.
class CalibrationStall : public StageError {
 public:
  CalibrationStall(const std::string& what, CalibrationResult result)
      : StageError(what), result_(std::move(result)) {}

  const CalibrationResult& result() const { return result_; }

 private:
  CalibrationResult result_;
};

/// Gradient descent in log-parameter space with backtracking and projection
/// onto the bounds. Every accepted iterate lowers the objective.
CalibrationResult calibrate(const BuildingModel& initial, const ParameterSpace& space, const Trace& observed,
                            const WeatherSeries& weather, const CalibrationConfig& config,
                            const std::optional<Eigen::VectorXd>& initial_state = std::nullopt);

struct WatchdogConfig {
  double window_s = 86400.0;
  double threshold_c = 1.0;
  double dt = 60.0;
};

struct RecalibrationEvent {
  double time_s = 0.0;
  double pre_rmse = 0.0;
  double post_rmse = 0.0;
  bool degraded = false;
  std::size_t iterations = 0;
};

/// Replays observations against the current model and re-calibrates on the
/// trailing window whenever its RMSE exceeds the threshold, at most once per
/// window span.
class Watchdog {
 public:
  Watchdog(BuildingModel model, ParameterSpace space, CalibrationConfig calibration, WatchdogConfig config);

  /// Feeds one sample; returns the event if it triggered a re-calibration.
  std::optional<RecalibrationEvent> push(double time_s, double t_out, double t_zone, bool hvac_on);

  const BuildingModel& model() const { return model_; }
  const std::vector<RecalibrationEvent>& events() const { return events_; }
  double rolling_rmse() const;

 private:
  struct Sample {
    double time, t_out, observed, simulated;
    bool hvac_on;
    bool scored;
    Eigen::VectorXd state;  // nodal state of the current model at this sample
  };

  void trim(double now);
  RecalibrationEvent recalibrate(double now, double pre_rmse);

  BuildingModel model_;
  ParameterSpace space_;
  CalibrationConfig calibration_;
  WatchdogConfig config_;
  Simulator sim_;
  std::vector<Sample> window_;
  std::vector<RecalibrationEvent> events_;
  std::optional<double> first_time_;
  std::optional<double> last_event_;
};

/// Replays a recorded stream through a Watchdog.
std::vector<RecalibrationEvent> watchdog(const BuildingModel& model, const Trace& observed,
                                         const WeatherSeries& weather, const ParameterSpace& space,
                                         const CalibrationConfig& calibration, const WatchdogConfig& config,
                                         BuildingModel* final_model = nullptr);

}  // namespace roomtherm
