#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "roomtherm/geometry.hpp"

namespace roomtherm {

inline constexpr double kAirDensity = 1.204;        // kg/m^3
inline constexpr double kAirSpecificHeat = 1005.0;  // J/(kg K)

/// Envelope element classes, named as in the parameter table.
enum class Element { Walls, Windows, Door, Roof, Floor };

std::string to_string(Element element);
Element element_from_string(const std::string& s);

struct Material {
  double thickness = 0.0;      // m
  double conductivity = 0.0;   // W/(m K)
  double density = 0.0;        // kg/m^3
  double specific_heat = 0.0;  // J/(kg K)

  /// Conduction per unit area through the full thickness, k/L in W/(m^2 K).
  double conductance() const { return conductivity / thickness; }
  void validate(const std::string& name) const;
};

using MaterialSet = std::map<Element, Material>;

struct SurfaceSpec {
  std::string name;
  Element element = Element::Walls;
  double area = 0.0;  // m^2
  bool exterior = true;
  double h_in = 7.7;   // W/(m^2 K)
  double h_out = 25.0;
};

struct HvacSpec {
  double cooling_capacity = 0.0;  // W
  double air_flow_rate = 0.0;     // m^3/s
  double supply_temp = 14.0;      // degC

  void validate() const;
};

struct BuildingModel {
  double zone_volume = 0.0;  // m^3
  double air_capacitance_multiplier = 1.0;
  MaterialSet materials;
  std::vector<SurfaceSpec> surfaces;
  HvacSpec hvac;
  double internal_gain = 0.0;  // W

  const Material& material(const SurfaceSpec& s) const;
  double zone_capacitance() const {
    return kAirDensity * kAirSpecificHeat * zone_volume * air_capacitance_multiplier;
  }
  void validate() const;
};

struct WeatherSeries {
  std::vector<double> timestamps;  // s, strictly increasing
  std::vector<double> t_out;       // degC

  std::size_t size() const { return timestamps.size(); }
  void validate() const;
};

using HvacSchedule = std::vector<bool>;

struct Trace {
  std::vector<double> timestamps;
  std::vector<double> t_zone;
  HvacSchedule hvac_on;

  std::size_t size() const { return timestamps.size(); }
  void validate() const;
};

/// Thickness and conductivity of walls, windows, door and roof, plus the
/// cooling capacity and air flow of the reference room. Density and specific
/// heat are not part of that table and carry default values.
MaterialSet table1_materials();
HvacSpec table1_hvac();

struct ModelDefaults {
  double h_in = 7.7;
  double h_out = 25.0;
  double air_capacitance_multiplier = 1.0;
  double internal_gain = 0.0;
  bool floor_exterior = false;
};

/// One surface per wall, opening, roof and floor of the geometry.
BuildingModel build_model(const BuildingGeometry& geometry, const MaterialSet& materials, const HvacSpec& hvac,
                          const ModelDefaults& defaults = {});

/// Sensible cooling delivered to the zone in W (negative = heat removed).
double hvac_power(const HvacSpec& hvac, double t_zone, bool on);

/// Two-resistance one-capacitance surface: conductances toward the zone and
/// toward the far side, and the mid-thickness capacitance.
struct SurfaceNetwork {
  double g_in = 0.0;         // W/K
  double g_out = 0.0;        // W/K
  double capacitance = 0.0;  // J/K
};
SurfaceNetwork surface_network(const BuildingModel& model, const SurfaceSpec& surface);

/// Sum of series conductances of exterior surfaces, W/K.
double total_exterior_conductance(const BuildingModel& model);

/// Zone temperature where envelope losses balance a constant injected power.
double steady_state(const BuildingModel& model, double t_out, double hvac_power_w, double gains_w);

/// Node 0 is the zone air; node i > 0 is surface i - 1.
struct ThermalNetwork {
  Eigen::VectorXd capacitance;
  Eigen::MatrixXd conductance;  // symmetric, includes boundary conductances on the diagonal
  Eigen::VectorXd to_outdoor;   // conductance from each node to outdoor air

  explicit ThermalNetwork(const BuildingModel& model);
  Eigen::Index nodes() const { return capacitance.size(); }
};

/// Backward-Euler integrator holding the nodal state of one model.
class Simulator {
 public:
  explicit Simulator(BuildingModel model);

  void reset(double t_init);
  void reset(const Eigen::VectorXd& state);

  /// Advances by `h` seconds with outdoor temperature and HVAC status held.
  /// Returns the new zone temperature.
  double step(double t_out, bool hvac_on, double h);

  /// Advances over an interval in equal substeps no longer than `dt`.
  double advance(double t_out, bool hvac_on, double interval, double dt);

  const Eigen::VectorXd& state() const { return state_; }
  double zone_temperature() const { return state_[0]; }
  double last_hvac_power() const { return last_hvac_; }
  const BuildingModel& model() const { return model_; }
  const ThermalNetwork& network() const { return network_; }

 private:
  struct Factor {
    double h;
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd unit_response;  // state response to 1 W injected into the zone
  };
  const Factor& factor_for(double h);

  BuildingModel model_;
  ThermalNetwork network_;
  Eigen::VectorXd state_;
  std::vector<Factor> factors_;
  double last_hvac_ = 0.0;
  std::size_t steps_ = 0;
};

/// Samples the zone temperature at every weather timestamp, starting with
/// all nodes at `t_init`. Weather and schedule are held from each sample to
/// the next.
Trace simulate(const BuildingModel& model, const WeatherSeries& weather, const HvacSchedule& schedule, double dt,
               double t_init);

/// As simulate, from an explicit nodal state. When `states` is non-null it
/// receives the nodal state at every sample.
Trace simulate_from_state(const BuildingModel& model, const WeatherSeries& weather, const HvacSchedule& schedule,
                          double dt, const Eigen::VectorXd& initial_state,
                          std::vector<Eigen::VectorXd>* states = nullptr);

struct ResidualReport {
  double max_residual = 0.0;  // W
  double peak_flux = 0.0;     // largest nodal heat flow seen, W
  std::size_t worst_step = 0;
};

/// Re-evaluates the zone heat balance of a trace sampled at step resolution
/// (one backward-Euler step per sample). Surface states are rebuilt from the
/// trace, so any error shows up in the zone balance.
ResidualReport energy_residual(const BuildingModel& model, const Trace& trace, const WeatherSeries& weather,
                               const HvacSchedule& schedule, double dt);

}  // namespace roomtherm
