#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "steerlab/conditional.hpp"
#include "steerlab/dynamics_oracle.hpp"
#include "steerlab/optimize.hpp"

namespace steerlab {

// One sweep axis: a parameter path ("first.cooperativity", "second.theta",
// "channel.epsilon", ...) with a lin- or log-spaced grid.
struct AxisSpec {
  std::string param;
  double min = 0.0;
  double max = 0.0;
  int points = 0;
  bool log_scale = false;

  std::vector<double> values() const;
};

struct OptimizeSpec {
  Objective objective = Objective::EPlusGivenMinus;
  AngleMode mode = AngleMode::FreeAngles;
  bool free_c_plus = true;
  bool free_theta_plus = true;
  bool free_theta_minus = true;
  bool free_phi = false;
  ParamBounds c_plus_bounds{0.0, 0.0};
  ParamBounds theta_plus_bounds{0.0, kTwoPi / 4.0};
  ParamBounds theta_minus_bounds{0.0, kTwoPi / 4.0};
  ParamBounds phi_bounds{-kTwoPi / 2.0, kTwoPi / 2.0};

  OptimizationProblem problem(const CascadeConfig& base) const;
};

struct OracleSpec {
  enum class Kind { Lyapunov, MonteCarlo };
  Kind kind = Kind::Lyapunov;
  int n_configs = 100;
  double tolerance = 1e-8;
  SimulationSpec sim;
};

struct ScenarioFile {
  CascadeConfig config;
  std::vector<AxisSpec> sweep;
  std::optional<OptimizeSpec> optimize;
  std::optional<OracleSpec> oracle;
  std::optional<MeasurementModel> conditional;
};

// Parses and schema-checks a scenario document. Rates may be given as *_hz
// (multiplied by 2*pi) or *_rad_s; angles as theta (radians) or theta_pi
// (units of pi); the coupling as gamma or as cooperativity (exactly one).
// Unknown keys are rejected with a path-qualified message.
ScenarioFile parse_scenario(const nlohmann::json& doc);
ScenarioFile load_scenario(const std::filesystem::path& path);

// Assigns a swept parameter by path; cooperativity assignments rescale the
// coupling rate against the oscillator's current thermal decoherence rate.
void set_parameter(CascadeConfig& c, const std::string& path, double value);

// Resolved configuration (rad/s throughout), round-trippable via
// parse_scenario for manifests.
nlohmann::json config_to_json(const CascadeConfig& c);

}  // namespace steerlab
