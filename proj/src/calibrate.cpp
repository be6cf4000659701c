#include "roomtherm/calibrate.hpp"

#include <cmath>
#include <future>
#include <set>

namespace roomtherm {
namespace {

struct PathParts {
  std::string head;
  std::string field;
};

PathParts split_path(const std::string& path) {
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw InputError("parameter path '" + path + "' must look like <element>.<field>");
  }
  return {path.substr(0, dot), path.substr(dot + 1)};
}

double& material_field(Material& m, const std::string& field, const std::string& path) {
  if (field == "thickness") return m.thickness;
  if (field == "conductivity") return m.conductivity;
  if (field == "density") return m.density;
  if (field == "specific_heat") return m.specific_heat;
  throw InputError("unknown material field in '" + path + "'");
}

double& parameter_ref(BuildingModel& model, const std::string& path) {
  const auto [head, field] = split_path(path);
  if (head == "hvac") {
    if (field == "cooling_capacity") return model.hvac.cooling_capacity;
    if (field == "air_flow_rate") return model.hvac.air_flow_rate;
    if (field == "supply_temp") return model.hvac.supply_temp;
    throw InputError("unknown hvac field in '" + path + "'");
  }
  if (head == "zone") {
    if (field == "air_capacitance_multiplier") return model.air_capacitance_multiplier;
    if (field == "internal_gain") return model.internal_gain;
    throw InputError("unknown zone field in '" + path + "'");
  }
  const Element element = element_from_string(head);
  const auto it = model.materials.find(element);
  if (it == model.materials.end()) throw InputError("model has no material for '" + path + "'");
  return material_field(it->second, field, path);
}

std::pair<double, double> default_bounds(const std::string& path) {
  const auto [head, field] = split_path(path);
  if (field == "conductivity") return {0.01, 5.0};
  if (field == "thickness") return {0.001, 1.0};
  if (field == "density") return {10.0, 5000.0};
  if (field == "specific_heat") return {100.0, 5000.0};
  if (field == "cooling_capacity") return {500.0, 50000.0};
  if (field == "air_flow_rate") return {0.01, 5.0};
  if (field == "supply_temp") return {1.0, 30.0};
  if (field == "air_capacitance_multiplier") return {0.1, 50.0};
  if (field == "internal_gain") return {1.0, 50000.0};
  throw InputError("no default bounds for '" + path + "'");
}

BuildingModel with_log_parameters(BuildingModel model, const ParameterSpace& space, const Eigen::VectorXd& theta) {
  for (std::size_t i = 0; i < space.size(); ++i) {
    parameter_ref(model, space.entries[i].path) = std::exp(theta[static_cast<Eigen::Index>(i)]);
  }
  return model;
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Threshold: return "threshold";
    case StopReason::MinImprovement: return "min_improvement";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::NoDescent: return "no_descent";
  }
  return "max_iterations";
}

ParameterEntry ParameterSpace::with_default_bounds(const std::string& path) {
  const auto [lo, hi] = default_bounds(path);
  return {path, lo, hi};
}

ParameterSpace ParameterSpace::table1_default() {
  ParameterSpace space;
  for (const char* path : {"walls.conductivity", "windows.conductivity", "door.conductivity", "roof.conductivity",
                           "hvac.cooling_capacity", "hvac.air_flow_rate"}) {
    space.entries.push_back(with_default_bounds(path));
  }
  return space;
}

void ParameterSpace::validate() const {
  std::set<std::string> seen;
  BuildingModel probe;
  probe.materials = table1_materials();
  for (const auto& e : entries) {
    parameter_ref(probe, e.path);
    if (!seen.insert(e.path).second) throw InputError("duplicate parameter path '" + e.path + "'");
    if (!(e.lower > 0 && e.upper > e.lower && std::isfinite(e.upper))) {
      throw InputError("parameter '" + e.path + "' needs bounds 0 < lower < upper");
    }
  }
}

double get_parameter(const BuildingModel& model, const std::string& path) {
  return parameter_ref(const_cast<BuildingModel&>(model), path);
}

void set_parameter(BuildingModel& model, const std::string& path, double value) { parameter_ref(model, path) = value; }

void CalibrationConfig::validate() const {
  if (!(learning_rate > 0 && fd_rel_step > 0 && rmse_threshold > 0 && min_improvement > 0 && dt > 0)) {
    throw InputError("calibration: learning_rate, fd_rel_step, rmse_threshold, min_improvement and dt must be > 0");
  }
  if (!(backtrack_factor > 0 && backtrack_factor < 1)) throw InputError("calibration: backtrack_factor must be in (0, 1)");
  if (max_iterations < 1) throw InputError("calibration: max_iterations must be >= 1");
  if (!(burn_in_s >= 0)) throw InputError("calibration: burn_in_s must be >= 0");
}

double objective(const BuildingModel& model, const Trace& observed, const WeatherSeries& weather,
                 const ObjectiveOptions& options) {
  observed.validate();
  if (observed.size() != weather.size()) {
    throw InputError("alignment: observed has " + std::to_string(observed.size()) + " samples, weather has " +
                     std::to_string(weather.size()));
  }
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (std::abs(observed.timestamps[i] - weather.timestamps[i]) > 1e-6) {
      throw InputError("alignment: timestamp mismatch at row " + std::to_string(i));
    }
  }
  if (observed.size() == 0) throw InputError("observed trace is empty");

  Trace simulated;
  if (options.initial_state) {
    simulated = simulate_from_state(model, weather, observed.hvac_on, options.dt, *options.initial_state);
  } else {
    simulated = simulate(model, weather, observed.hvac_on, options.dt, options.t_init.value_or(observed.t_zone[0]));
  }

  double sum = 0.0;
  std::size_t n = 0;
  const double start = observed.timestamps.front();
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed.timestamps[i] - start < options.burn_in_s) continue;
    const double e = simulated.t_zone[i] - observed.t_zone[i];
    sum += e * e;
    ++n;
  }
  if (n == 0) throw InputError("no samples after the burn-in period");
  return std::sqrt(sum / static_cast<double>(n));
}

Eigen::VectorXd fd_gradient(const ScalarFunction& f, const Eigen::VectorXd& theta, double rel_step, bool parallel) {
  const Eigen::Index n = theta.size();
  Eigen::VectorXd values(2 * n);
  auto eval = [&](Eigen::Index k) {
    const Eigen::Index i = k / 2;
    const double h = rel_step * std::max(std::abs(theta[i]), 1.0);
    Eigen::VectorXd x = theta;
    x[i] += (k % 2 == 0) ? h : -h;
    return f(x);
  };
  if (parallel && n > 1) {
    std::vector<std::future<double>> jobs;
    for (Eigen::Index k = 0; k < 2 * n; ++k) jobs.push_back(std::async(std::launch::async, eval, k));
    for (Eigen::Index k = 0; k < 2 * n; ++k) values[k] = jobs[static_cast<std::size_t>(k)].get();
  } else {
    for (Eigen::Index k = 0; k < 2 * n; ++k) values[k] = eval(k);
  }

  Eigen::VectorXd grad(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(values[2 * i]) || !std::isfinite(values[2 * i + 1])) {
      throw StageError("gradient: non-finite objective when perturbing component " + std::to_string(i));
    }
    const double h = rel_step * std::max(std::abs(theta[i]), 1.0);
    grad[i] = (values[2 * i] - values[2 * i + 1]) / (2.0 * h);
  }
  return grad;
}

CalibrationResult calibrate(const BuildingModel& initial, const ParameterSpace& space, const Trace& observed,
                            const WeatherSeries& weather, const CalibrationConfig& config,
                            const std::optional<Eigen::VectorXd>& initial_state) {
  config.validate();
  if (space.empty()) throw InputError("parameter space is empty");
  space.validate();
  initial.validate();

  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::VectorXd theta(n), lower(n), upper(n);
  CalibrationResult result;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = space.entries[static_cast<std::size_t>(i)];
    const double v = get_parameter(initial, e.path);
    if (!(v >= e.lower && v <= e.upper)) {
      throw InputError("initial " + e.path + " = " + std::to_string(v) + " is outside [" + std::to_string(e.lower) +
                       ", " + std::to_string(e.upper) + "]");
    }
    theta[i] = std::log(v);
    lower[i] = std::log(e.lower);
    upper[i] = std::log(e.upper);
    result.initial_values.push_back(v);
  }

  ObjectiveOptions options{config.dt, config.burn_in_s, std::nullopt, initial_state};
  const ScalarFunction f = [&](const Eigen::VectorXd& x) {
    return objective(with_log_parameters(initial, space, x), observed, weather, options);
  };

  double current = f(theta);
  result.objective_history.push_back(current);
  result.reason = StopReason::MaxIterations;
  if (current <= config.rmse_threshold) {
    result.reason = StopReason::Threshold;
  }

  while (result.reason == StopReason::MaxIterations && result.iterations < config.max_iterations) {
    const Eigen::VectorXd grad = fd_gradient(f, theta, config.fd_rel_step, config.parallel);
    result.last_gradient = grad;

    double step = config.learning_rate;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double value = current;
    for (std::size_t k = 0; k <= config.max_halvings; ++k, step *= config.backtrack_factor) {
      candidate = (theta - step * grad).cwiseMax(lower).cwiseMin(upper);
      value = f(candidate);
      if (value < current) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.reason = StopReason::NoDescent;
      if (result.iterations == 0 && current > config.rmse_threshold) {
        result.model = with_log_parameters(initial, space, theta);
        result.final_rmse = current;
        result.calibrated_values = result.initial_values;
        throw CalibrationStall("calibration stalled: no descent from the initial model (rmse " +
                                   std::to_string(current) + " C, |grad| " + std::to_string(grad.norm()) + ")",
                               std::move(result));
      }
      break;
    }

    const double improvement = current - value;
    theta = candidate;
    current = value;
    result.objective_history.push_back(current);
    ++result.iterations;
    if (current <= config.rmse_threshold) {
      result.reason = StopReason::Threshold;
    } else if (improvement < config.min_improvement) {
      result.reason = StopReason::MinImprovement;
    }
  }

  result.model = with_log_parameters(initial, space, theta);
  result.final_rmse = current;
  for (Eigen::Index i = 0; i < n; ++i) result.calibrated_values.push_back(std::exp(theta[i]));
  return result;
}

}  // namespace roomtherm
