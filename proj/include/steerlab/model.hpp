#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steerlab/errors.hpp"

namespace steerlab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// One oscillator of the cascade: light coupling (Gamma, theta), thermal
// environment (gamma0, nbar) and an optional signed effective resonance
// used only for rotating-wave validity diagnostics. All rates are angular
// frequencies in rad/s.
struct OscillatorParams {
  double gamma = 0.0;   // light coupling rate Gamma >= 0
  double theta = 0.0;   // interaction angle in [0, pi/2]
  double gamma0 = 0.0;  // intrinsic damping rate >= 0
  double nbar = 0.0;    // thermal occupation >= 0
  std::optional<double> omega_eff;  // signed effective resonance

  // Thermal decoherence rate gamma0*(nbar + 1/2).
  double thermal_decoherence() const { return gamma0 * (nbar + 0.5); }

  // Builds params with gamma = cooperativity * gamma0*(nbar + 1/2).
  static OscillatorParams from_cooperativity(double cooperativity, double theta,
                                             double gamma0, double nbar,
                                             std::optional<double> omega_eff = {});
};

// Light channel between the two oscillators.
struct ChannelParams {
  double epsilon = 0.0;  // transmission power loss in [0, 1]
  double phi = 0.0;      // quadrature rotation phase
};

// The full experiment: first ("-", upstream) then second ("+", downstream)
// oscillator, connected by the unidirectional channel.
struct CascadeConfig {
  OscillatorParams first;
  OscillatorParams second;
  ChannelParams channel;

  // Same physical pair with the cascade order reversed.
  CascadeConfig swapped() const { return {second, first, channel}; }
};

// Rates derived from one oscillator's parameters.
struct DerivedRates {
  double gamma_B = 0.0;       // beam-splitter part Gamma*sin^2(theta)
  double gamma_P = 0.0;       // parametric part Gamma - gamma_B
  double gamma_opt = 0.0;     // dynamical broadening gamma_B - gamma_P
  double gamma_total = 0.0;   // gamma0 + gamma_opt
  double gamma_tilde0 = 0.0;  // thermal decoherence rate
  double cooperativity = 0.0;
  // False when gamma_tilde0 = 0 while Gamma > 0; cooperativity is then the
  // +infinity sentinel.
  bool cooperativity_defined = true;
};

DerivedRates derived_rates(const OscillatorParams& p);

// Effective one-way coupling rate R of the first onto the second oscillator
// and its normalized form f = 2R/gamma_plus.
struct DirectionalCoupling {
  double rate = 0.0;
  double f = 0.0;
};

DirectionalCoupling directional_coupling(const CascadeConfig& c);

enum class ConfigError {
  UnstableFirst,
  UnstableSecond,
  ChannelLossOutOfRange,
  NegativeRate,
  ThetaOutOfRange,
  NegativeOccupation,
  OmegaMismatch,
  NonFiniteValue,
};

enum class ConfigWarning {
  RwaQuestionableFirst,
  RwaQuestionableSecond,
};

struct ValidationReport {
  std::vector<std::pair<ConfigError, std::string>> errors;
  std::vector<std::pair<ConfigWarning, std::string>> warnings;

  bool ok() const { return errors.empty(); }
  bool has(ConfigError e) const;
  bool has(ConfigWarning w) const;
};

// The rotating-wave treatment assumes |Omega| >> max(Gamma, gamma_tilde0);
// below this factor a warning is emitted. Artifact default, adjustable here.
inline constexpr double kRwaWarningFactor = 100.0;

// Collects hard errors and soft warnings; never throws on finite input.
ValidationReport validate(const CascadeConfig& c);

// Throws the matching exception for the first hard error, if any.
void require_valid(const CascadeConfig& c);

const char* to_string(ConfigError e);
const char* to_string(ConfigWarning w);

}  // namespace steerlab
