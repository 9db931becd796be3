#include "steerlab/steering.hpp"

#include <cmath>
#include <sstream>

namespace steerlab {

namespace {

// Negative values beyond roundoff of the variance scale indicate broken
// input moments rather than floating-point cancellation.
double clamp_nonnegative(double e, double scale, const char* label) {
  if (e >= 0.0) return e;
  if (e >= -1e-12 * std::max(1.0, scale)) return 0.0;
  std::ostringstream msg;
  msg << label << " = " << e << " is negative beyond the floating-point guard";
  throw InternalConsistency(msg.str());
}

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace

std::pair<double, double> optimal_gains(const SteadyStateMoments& m) {
  if (m.var_xm <= 0.0 || m.var_pm <= 0.0) {
    throw DegenerateVariance("optimal gains undefined: upstream variance is zero");
  }
  const double g_x = m.cov_xx / m.var_xm;
  const double g_p = -m.cov_pp / m.var_pm;
  return {g_x, g_p};
}

SteeringReport steering_parameters(const SteadyStateMoments& m) {
  if (m.var_xm <= 0.0 || m.var_xp <= 0.0) {
    throw DegenerateVariance("steering parameters undefined: zero variance");
  }
  SteeringReport rep;
  std::tie(rep.gain_x, rep.gain_p) = optimal_gains(m);
  rep.e_plus_given_minus = clamp_nonnegative(
      m.var_xp - m.cov_xx * m.cov_xx / m.var_xm, m.var_xp, "E+|-");
  rep.e_minus_given_plus = clamp_nonnegative(
      m.var_xm - m.cov_xx * m.cov_xx / m.var_xp, m.var_xm, "E-|+");
  rep.classification = classify(rep.e_plus_given_minus, rep.e_minus_given_plus);
  if (rep.e_minus_given_plus > 0.0) {
    rep.ratio = rep.e_plus_given_minus / rep.e_minus_given_plus;
    rep.ratio_defined = true;
  }
  rep.rwa_symmetric = close(m.var_xm, m.var_pm, 1e-9) &&
                      close(m.var_xp, m.var_pp, 1e-9) &&
                      close(m.cov_xx, -m.cov_pp, 1e-9);
  return rep;
}

double steering_ratio(const SteadyStateMoments& m) {
  if (m.var_xm <= 0.0) {
    throw DegenerateVariance("steering ratio undefined: upstream variance is zero");
  }
  const SteeringReport rep = steering_parameters(m);
  if (rep.e_minus_given_plus <= 0.0) {
    throw DivisionByZeroRatio("steering ratio undefined: E-|+ = 0");
  }
  const double ratio = rep.e_plus_given_minus / rep.e_minus_given_plus;
  const double variance_ratio = m.var_xp / m.var_xm;
  if (!close(ratio, variance_ratio, 1e-10)) {
    std::ostringstream msg;
    msg << "steering-ratio identity violated: E ratio " << ratio
        << " vs variance ratio " << variance_ratio;
    throw InternalConsistency(msg.str());
  }
  return ratio;
}

SteeringClass classify(double e_plus_given_minus, double e_minus_given_plus) {
  const bool down = e_plus_given_minus < 0.5;
  const bool up = e_minus_given_plus < 0.5;
  if (down && up) return SteeringClass::TwoWay;
  if (down) return SteeringClass::OneWayMinusToPlus;
  if (up) return SteeringClass::OneWayPlusToMinus;
  return SteeringClass::NoSteering;
}

const char* to_string(SteeringClass c) {
  switch (c) {
    case SteeringClass::NoSteering: return "no_steering";
    case SteeringClass::OneWayMinusToPlus: return "one_way_minus_to_plus";
    case SteeringClass::OneWayPlusToMinus: return "one_way_plus_to_minus";
    case SteeringClass::TwoWay: return "two_way";
  }
  return "?";
}

int class_code(SteeringClass c) {
  switch (c) {
    case SteeringClass::NoSteering: return 0;
    case SteeringClass::OneWayMinusToPlus: return 1;
    case SteeringClass::OneWayPlusToMinus: return 2;
    case SteeringClass::TwoWay: return 3;
  }
  return -1;
}

}  // namespace steerlab
