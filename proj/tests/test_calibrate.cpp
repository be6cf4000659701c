#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "roomtherm/calibrate.hpp"
#include "roomtherm/scenario.hpp"

using namespace roomtherm;

namespace {

BuildingModel table1_room() { return build_model(box_geometry(5, 4, 3), table1_materials(), table1_hvac()); }

struct Observed {
  WeatherSeries weather;
  Trace trace;
};

Observed observe(const BuildingModel& m, const ScenarioConfig& sc = {}, double dt = 60) {
  Observed o{sc.weather(), {}};
  o.trace = simulate(m, o.weather, sc.schedule(o.weather), dt, sc.t_init_c);
  return o;
}

CalibrationConfig serial() {
  CalibrationConfig c;
  c.parallel = false;
  return c;
}

}  // namespace

TEST(Parameters, GetAndSetByPath) {
  auto m = table1_room();
  EXPECT_DOUBLE_EQ(get_parameter(m, "walls.conductivity"), 0.311);
  EXPECT_DOUBLE_EQ(get_parameter(m, "hvac.cooling_capacity"), 8943.0);
  EXPECT_DOUBLE_EQ(get_parameter(m, "hvac.air_flow_rate"), 0.384);
  set_parameter(m, "roof.conductivity", 0.6);
  EXPECT_DOUBLE_EQ(m.materials.at(Element::Roof).conductivity, 0.6);
  set_parameter(m, "hvac.cooling_capacity", 5000);
  EXPECT_DOUBLE_EQ(m.hvac.cooling_capacity, 5000.0);
  EXPECT_THROW(get_parameter(m, "walls"), InputError);
  EXPECT_THROW(get_parameter(m, "walls.colour"), InputError);
  EXPECT_THROW(get_parameter(m, "attic.conductivity"), InputError);
  EXPECT_THROW(get_parameter(m, "hvac.fan_speed"), InputError);
}

TEST(ParameterSpace, DefaultAndValidation) {
  const auto space = ParameterSpace::table1_default();
  ASSERT_EQ(space.size(), 6u);
  EXPECT_NO_THROW(space.validate());
  for (const auto& e : space.entries) {
    EXPECT_GT(e.lower, 0);
    EXPECT_LT(e.lower, e.upper);
    EXPECT_GE(get_parameter(table1_room(), e.path) * 1.5, e.lower);
    EXPECT_LE(get_parameter(table1_room(), e.path) * 1.5, e.upper);
  }
  ParameterSpace dup{{space.entries[0], space.entries[0]}};
  EXPECT_THROW(dup.validate(), InputError);
  ParameterSpace inverted{{{"walls.conductivity", 2.0, 1.0}}};
  EXPECT_THROW(inverted.validate(), InputError);
  ParameterSpace negative{{{"walls.conductivity", -1.0, 1.0}}};
  EXPECT_THROW(negative.validate(), InputError);
  ParameterSpace unknown{{{"walls.colour", 1.0, 2.0}}};
  EXPECT_THROW(unknown.validate(), InputError);
}

TEST(Objective, SelfConsistentIsZero) {
  const auto m = table1_room();
  const auto o = observe(m);
  EXPECT_NEAR(objective(m, o.trace, o.weather), 0.0, 1e-12);
}

TEST(Objective, ConstantOffsetGivesOne) {
  const auto m = table1_room();
  auto o = observe(m);
  for (auto& t : o.trace.t_zone) t += 1.0;
  ObjectiveOptions opt;
  opt.t_init = 30.0;  // the model's own start, not the shifted first sample
  EXPECT_NEAR(objective(m, o.trace, o.weather, opt), 1.0, 1e-9);
}

TEST(Objective, WrongConductivityIsPositive) {
  const auto m = table1_room();
  const auto o = observe(m);
  auto wrong = m;
  set_parameter(wrong, "walls.conductivity", 0.622);
  EXPECT_GT(objective(wrong, o.trace, o.weather), 0.01);
}

TEST(Objective, BurnInExcludesEarlySamples) {
  const auto m = table1_room();
  auto o = observe(m);
  for (std::size_t i = 0; i < o.trace.size(); ++i) {
    if (o.trace.timestamps[i] < 3600) o.trace.t_zone[i] += 5.0;
  }
  ObjectiveOptions opt;
  opt.t_init = 30.0;
  EXPECT_NEAR(objective(m, o.trace, o.weather, opt), 0.0, 1e-12);
  opt.burn_in_s = 0;
  ASSERT_EQ(o.trace.size(), 577u);  // 12 of them inside the first hour
  EXPECT_NEAR(objective(m, o.trace, o.weather, opt), 5.0 * std::sqrt(12.0 / 577.0), 1e-9);
}

TEST(Objective, MisalignedSeries) {
  const auto m = table1_room();
  auto o = observe(m);
  auto shorter = o.weather;
  shorter.timestamps.pop_back();
  shorter.t_out.pop_back();
  EXPECT_THROW(objective(m, o.trace, shorter), InputError);
  auto shifted = o.weather;
  shifted.timestamps[10] += 1.0;
  EXPECT_THROW(objective(m, o.trace, shifted), InputError);
}

TEST(FdGradient, Quadratic) {
  const ScalarFunction f = [](const Eigen::VectorXd& x) { return (x[0] - 2) * (x[0] - 2); };
  EXPECT_NEAR(fd_gradient(f, Eigen::VectorXd::Zero(1), 1e-4)[0], -4.0, 1e-6);
}

TEST(FdGradient, ConstantIsZero) {
  const ScalarFunction f = [](const Eigen::VectorXd&) { return 3.5; };
  const auto g = fd_gradient(f, Eigen::VectorXd::Constant(4, 0.7), 1e-4);
  EXPECT_EQ(g, Eigen::VectorXd::Zero(4));
}

TEST(FdGradient, AnalyticFunctionsAtRandomPoints) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-3, 3);
  const Eigen::Vector3d a(1.5, -0.5, 2.0), c(0.3, -1.2, 0.8);
  const ScalarFunction quad = [&](const Eigen::VectorXd& x) { return (x - c).cwiseProduct(a).dot(x - c); };
  const ScalarFunction expo = [&](const Eigen::VectorXd& x) { return std::exp(a.dot(x) / 4); };
  for (int k = 0; k < 100; ++k) {
    const Eigen::Vector3d x(u(rng), u(rng), u(rng));
    const Eigen::Vector3d dq = 2 * a.cwiseProduct(x - c);
    const Eigen::Vector3d de = a / 4 * std::exp(a.dot(x) / 4);
    const auto gq = fd_gradient(quad, x, 1e-4);
    const auto ge = fd_gradient(expo, x, 1e-4);
    for (int i = 0; i < 3; ++i) {
      EXPECT_LE(std::abs(gq[i] - dq[i]), 1e-6 * std::max(1.0, std::abs(dq[i])));
      EXPECT_LE(std::abs(ge[i] - de[i]), 1e-6 * std::max(1.0, std::abs(de[i])));
    }
  }
}

TEST(FdGradient, ParallelMatchesSerial) {
  const ScalarFunction f = [](const Eigen::VectorXd& x) { return std::sin(x[0]) * x[1] + x[2] * x[2] * x[3]; };
  const Eigen::Vector4d x(0.3, 1.2, -0.7, 2.0);
  EXPECT_EQ(fd_gradient(f, x, 1e-4, false), fd_gradient(f, x, 1e-4, true));
}

TEST(FdGradient, NonFiniteNamesComponent) {
  const ScalarFunction f = [](const Eigen::VectorXd& x) {
    return x[1] > 1.0 ? std::numeric_limits<double>::infinity() : x[0];
  };
  try {
    fd_gradient(f, Eigen::Vector2d(0.0, 1.0), 1e-4);
    FAIL() << "expected an error";
  } catch (const StageError& e) {
    EXPECT_NE(std::string(e.what()).find("component 1"), std::string::npos);
  }
}

TEST(FdGradient, SmallAtOptimum) {
  const auto m = table1_room();
  const auto o = observe(m);
  const auto space = ParameterSpace::table1_default();
  const ScalarFunction f = [&](const Eigen::VectorXd& x) {
    auto model = m;
    for (Eigen::Index i = 0; i < x.size(); ++i) set_parameter(model, space.entries[i].path, std::exp(x[i]));
    return objective(model, o.trace, o.weather);
  };
  Eigen::VectorXd theta(6);
  for (Eigen::Index i = 0; i < 6; ++i) theta[i] = std::log(get_parameter(m, space.entries[i].path));
  EXPECT_LE(fd_gradient(f, theta, 1e-4).norm(), 1e-3);
}

TEST(Calibrate, RecoveryReducesRmseMonotonically) {
  const auto e = make_recovery_experiment(table1_room(), ScenarioConfig{}, ParameterSpace::table1_default(), 1.5, 60);
  const auto r = calibrate(e.initial, ParameterSpace::table1_default(), e.observed, e.weather, serial());
  EXPECT_LE(r.final_rmse, 0.3);
  EXPECT_LE(r.iterations, 500u);
  ASSERT_EQ(r.objective_history.size(), r.iterations + 1);
  for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
    EXPECT_LE(r.objective_history[i], r.objective_history[i - 1]);
  }
  EXPECT_EQ(r.final_rmse, r.objective_history.back());
  EXPECT_EQ(r.reason, StopReason::Threshold);
}

TEST(Calibrate, IteratesStayInBounds) {
  auto space = ParameterSpace::table1_default();
  for (auto& entry : space.entries) {
    const double v = get_parameter(table1_room(), entry.path);
    entry.lower = v * 1.2;  // truth is outside, so the optimum sits on the bound
    entry.upper = v * 1.8;
  }
  const auto e = make_recovery_experiment(table1_room(), ScenarioConfig{}, space, 1.5, 60);
  auto cfg = serial();
  cfg.max_iterations = 30;
  cfg.rmse_threshold = 1e-6;
  const auto r = calibrate(e.initial, space, e.observed, e.weather, cfg);
  for (std::size_t i = 0; i < space.size(); ++i) {
    EXPECT_GE(r.calibrated_values[i], space.entries[i].lower * (1 - 1e-12));
    EXPECT_LE(r.calibrated_values[i], space.entries[i].upper * (1 + 1e-12));
    EXPECT_DOUBLE_EQ(get_parameter(r.model, space.entries[i].path), r.calibrated_values[i]);
  }
}

TEST(Calibrate, Deterministic) {
  const auto space = ParameterSpace::table1_default();
  const auto e = make_recovery_experiment(table1_room(), ScenarioConfig{}, space, 1.5, 60);
  auto cfg = serial();
  cfg.max_iterations = 5;
  const auto a = calibrate(e.initial, space, e.observed, e.weather, cfg);
  cfg.parallel = true;
  const auto b = calibrate(e.initial, space, e.observed, e.weather, cfg);
  EXPECT_EQ(a.objective_history, b.objective_history);
  EXPECT_EQ(a.calibrated_values, b.calibrated_values);
}

TEST(Calibrate, AlreadyOptimal) {
  const auto m = table1_room();
  const auto o = observe(m);
  const auto r = calibrate(m, ParameterSpace::table1_default(), o.trace, o.weather, serial());
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_NEAR(r.final_rmse, 0.0, 1e-9);
}

TEST(Calibrate, CoolingCapacityRecovery) {
  // The reference room never drives its unit to full capacity, so the
  // capacity is observed in the hot office.
  const auto truth = hot_office_model();
  const auto o = observe(truth, hot_office_scenario());
  ParameterSpace space{{ParameterSpace::with_default_bounds("hvac.cooling_capacity")}};
  auto start = truth;
  set_parameter(start, "hvac.cooling_capacity", 4000);
  auto cfg = serial();
  cfg.rmse_threshold = 1e-3;
  cfg.min_improvement = 1e-6;
  cfg.learning_rate = 0.02;
  const auto r = calibrate(start, space, o.trace, o.weather, cfg);
  EXPECT_NEAR(r.calibrated_values[0], 8943.0, 0.05 * 8943.0);
}

TEST(Calibrate, EmptySpace) {
  const auto m = table1_room();
  const auto o = observe(m);
  EXPECT_THROW(calibrate(m, ParameterSpace{}, o.trace, o.weather, serial()), InputError);
}

TEST(Calibrate, InitialOutsideBounds) {
  const auto m = table1_room();
  const auto o = observe(m);
  ParameterSpace space{{{"walls.conductivity", 1.0, 2.0}}};
  EXPECT_THROW(calibrate(m, space, o.trace, o.weather, serial()), InputError);
}

TEST(Calibrate, StallReportsHistory) {
  // Air flow has no effect while the HVAC never runs, so there is no descent.
  const auto m = table1_room();
  auto sc = ScenarioConfig{};
  sc.hvac_on_hour = 0;
  sc.hvac_off_hour = 0;
  auto o = observe(m, sc);
  for (auto& t : o.trace.t_zone) t += 2.0;
  ParameterSpace space{{ParameterSpace::with_default_bounds("hvac.air_flow_rate")}};
  try {
    calibrate(m, space, o.trace, o.weather, serial());
    FAIL() << "expected a stall";
  } catch (const CalibrationStall& s) {
    EXPECT_EQ(s.result().objective_history.size(), 1u);
    EXPECT_GT(s.result().final_rmse, 0.3);
    EXPECT_EQ(s.result().last_gradient.size(), 1);
    EXPECT_EQ(s.result().reason, StopReason::NoDescent);
  }
}

TEST(Calibrate, ConfigValidation) {
  CalibrationConfig c;
  c.backtrack_factor = 1.0;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), InputError);
}
