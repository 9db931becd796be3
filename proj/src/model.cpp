#include "steerlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace steerlab {

namespace {

bool all_finite(const OscillatorParams& p) {
  return std::isfinite(p.gamma) && std::isfinite(p.theta) &&
         std::isfinite(p.gamma0) && std::isfinite(p.nbar) &&
         (!p.omega_eff || std::isfinite(*p.omega_eff));
}

}  // namespace

OscillatorParams OscillatorParams::from_cooperativity(double cooperativity,
                                                      double theta, double gamma0,
                                                      double nbar,
                                                      std::optional<double> omega_eff) {
  const double gt0 = gamma0 * (nbar + 0.5);
  if (gt0 <= 0.0 && cooperativity > 0.0) {
    throw CooperativityUndefined(
        "cannot convert cooperativity to a coupling rate: thermal decoherence "
        "rate is zero");
  }
  OscillatorParams p;
  p.gamma = cooperativity * gt0;
  p.theta = theta;
  p.gamma0 = gamma0;
  p.nbar = nbar;
  p.omega_eff = omega_eff;
  return p;
}

DerivedRates derived_rates(const OscillatorParams& p) {
  const double s = std::sin(p.theta);
  DerivedRates r;
  r.gamma_B = p.gamma * s * s;
  r.gamma_P = p.gamma - r.gamma_B;
  r.gamma_opt = r.gamma_B - r.gamma_P;
  r.gamma_total = p.gamma0 + r.gamma_opt;
  r.gamma_tilde0 = p.thermal_decoherence();
  if (r.gamma_tilde0 > 0.0) {
    r.cooperativity = p.gamma / r.gamma_tilde0;
    r.cooperativity_defined = true;
  } else if (p.gamma == 0.0) {
    r.cooperativity = 0.0;
    r.cooperativity_defined = true;
  } else {
    r.cooperativity = std::numeric_limits<double>::infinity();
    r.cooperativity_defined = false;
  }
  return r;
}

DirectionalCoupling directional_coupling(const CascadeConfig& c) {
  const DerivedRates rm = derived_rates(c.first);
  const DerivedRates rp = derived_rates(c.second);
  if (rp.gamma_total <= 0.0) {
    throw UnstableConfig("gamma_plus <= 0: directional coupling f undefined");
  }
  DirectionalCoupling dc;
  dc.rate = std::sqrt(rm.gamma_B * rp.gamma_P) - std::sqrt(rp.gamma_B * rm.gamma_P);
  dc.f = 2.0 * dc.rate / rp.gamma_total;
  return dc;
}

bool ValidationReport::has(ConfigError e) const {
  return std::any_of(errors.begin(), errors.end(),
                     [e](const auto& p) { return p.first == e; });
}

bool ValidationReport::has(ConfigWarning w) const {
  return std::any_of(warnings.begin(), warnings.end(),
                     [w](const auto& p) { return p.first == w; });
}

namespace {

void validate_oscillator(const OscillatorParams& p, const char* label, bool first,
                         ValidationReport& report) {
  std::ostringstream msg;
  if (!all_finite(p)) {
    msg << label << ": non-finite parameter";
    report.errors.emplace_back(ConfigError::NonFiniteValue, msg.str());
    return;
  }
  if (p.gamma < 0.0 || p.gamma0 < 0.0) {
    msg << label << ": negative rate (gamma=" << p.gamma << ", gamma0=" << p.gamma0
        << ")";
    report.errors.emplace_back(ConfigError::NegativeRate, msg.str());
  }
  if (p.nbar < 0.0) {
    msg << label << ": nbar=" << p.nbar << " < 0";
    report.errors.emplace_back(ConfigError::NegativeOccupation, msg.str());
  }
  if (p.theta < 0.0 || p.theta > kTwoPi / 4.0) {
    msg << label << ": theta=" << p.theta << " outside [0, pi/2]";
    report.errors.emplace_back(ConfigError::ThetaOutOfRange, msg.str());
  }
  if (report.errors.empty()) {
    const DerivedRates r = derived_rates(p);
    if (r.gamma_total <= 0.0) {
      msg << label << ": total damping " << r.gamma_total << " <= 0";
      report.errors.emplace_back(
          first ? ConfigError::UnstableFirst : ConfigError::UnstableSecond,
          msg.str());
    }
    if (p.omega_eff) {
      const double scale = std::max(p.gamma, r.gamma_tilde0);
      if (std::abs(*p.omega_eff) < kRwaWarningFactor * scale) {
        msg << label << ": |omega_eff|=" << std::abs(*p.omega_eff) << " < "
            << kRwaWarningFactor << "*max(gamma, gamma_tilde0)=" << scale
            << "; rotating-wave treatment questionable";
        report.warnings.emplace_back(first ? ConfigWarning::RwaQuestionableFirst
                                           : ConfigWarning::RwaQuestionableSecond,
                                     msg.str());
      }
    }
  }
}

}  // namespace

ValidationReport validate(const CascadeConfig& c) {
  ValidationReport report;
  validate_oscillator(c.first, "first", true, report);
  validate_oscillator(c.second, "second", false, report);
  if (!std::isfinite(c.channel.epsilon) || !std::isfinite(c.channel.phi)) {
    report.errors.emplace_back(ConfigError::NonFiniteValue,
                               "channel: non-finite parameter");
  } else if (c.channel.epsilon < 0.0 || c.channel.epsilon > 1.0) {
    std::ostringstream msg;
    msg << "channel: epsilon=" << c.channel.epsilon << " outside [0, 1]";
    report.errors.emplace_back(ConfigError::ChannelLossOutOfRange, msg.str());
  }
  if (c.first.omega_eff && c.second.omega_eff) {
    const double wm = *c.first.omega_eff;
    const double wp = *c.second.omega_eff;
    const double scale = std::max(std::abs(wm), std::abs(wp));
    const bool magnitudes_match = std::abs(std::abs(wm) - std::abs(wp)) <= 1e-12 * scale;
    const bool signs_opposite = wm * wp < 0.0;
    if (!magnitudes_match || !signs_opposite) {
      std::ostringstream msg;
      msg << "omega_eff must have equal magnitudes and opposite signs, got " << wm
          << " and " << wp;
      report.errors.emplace_back(ConfigError::OmegaMismatch, msg.str());
    }
  }
  return report;
}

void require_valid(const CascadeConfig& c) {
  const ValidationReport report = validate(c);
  if (report.ok()) return;
  const auto& [code, msg] = report.errors.front();
  switch (code) {
    case ConfigError::UnstableFirst:
    case ConfigError::UnstableSecond:
      throw UnstableConfig(msg);
    case ConfigError::ChannelLossOutOfRange:
      throw ChannelLossOutOfRange(msg);
    default:
      throw InvalidParameter(msg);
  }
}

const char* to_string(ConfigError e) {
  switch (e) {
    case ConfigError::UnstableFirst: return "UnstableFirst";
    case ConfigError::UnstableSecond: return "UnstableSecond";
    case ConfigError::ChannelLossOutOfRange: return "ChannelLossOutOfRange";
    case ConfigError::NegativeRate: return "NegativeRate";
    case ConfigError::ThetaOutOfRange: return "ThetaOutOfRange";
    case ConfigError::NegativeOccupation: return "NegativeOccupation";
    case ConfigError::OmegaMismatch: return "OmegaMismatch";
    case ConfigError::NonFiniteValue: return "NonFiniteValue";
  }
  return "?";
}

const char* to_string(ConfigWarning w) {
  switch (w) {
    case ConfigWarning::RwaQuestionableFirst: return "RwaQuestionableFirst";
    case ConfigWarning::RwaQuestionableSecond: return "RwaQuestionableSecond";
  }
  return "?";
}

}  // namespace steerlab
