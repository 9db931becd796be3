#pragma once

#include <utility>

#include "steerlab/steady_state.hpp"

namespace steerlab {

// Which directions violate the inferred-uncertainty bound E < 1/2.
enum class SteeringClass {
  NoSteering,
  OneWayMinusToPlus,  // downstream steered: E+|- < 1/2 only
  OneWayPlusToMinus,  // upstream steered:   E-|+ < 1/2 only
  TwoWay,
};

struct SteeringReport {
  double e_plus_given_minus = 0.0;
  double e_minus_given_plus = 0.0;
  double gain_x = 0.0;
  double gain_p = 0.0;
  SteeringClass classification = SteeringClass::NoSteering;
  double ratio = 0.0;  // e_plus_given_minus / e_minus_given_plus
  bool ratio_defined = false;
  // True when the rotating-wave symmetries (equal X/P variances, opposite
  // cross covariances) held on the input moments, in which case the
  // variance-form parameters below equal the uncertainty-product form.
  bool rwa_symmetric = true;
};

// Gains minimizing the inferred variances; within the rotating-wave
// symmetries g_x = g_p = cov_xx / var_xm.
std::pair<double, double> optimal_gains(const SteadyStateMoments& m);

// Minimized inferred variances in both directions plus classification.
SteeringReport steering_parameters(const SteadyStateMoments& m);

// E+|- / E-|+, which algebraically equals var_xp / var_xm; the equality is
// asserted internally to relative 1e-10.
double steering_ratio(const SteadyStateMoments& m);

// Strict comparison against 1/2; equality counts as no steering.
SteeringClass classify(double e_plus_given_minus, double e_minus_given_plus);

const char* to_string(SteeringClass c);

// Stable CSV code: 0 none, 1 minus-to-plus, 2 plus-to-minus, 3 two-way.
int class_code(SteeringClass c);

}  // namespace steerlab
