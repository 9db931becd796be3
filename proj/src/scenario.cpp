#include "steerlab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace steerlab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InvalidParameter("scenario: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(path + "." + key, "unknown key");
  }
}

double require_number(const json& obj, const std::string& path,
                      const std::string& key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing");
  if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
  return obj[key].get<double>();
}

std::optional<double> optional_number(const json& obj, const std::string& path,
                                      const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
  return obj[key].get<double>();
}

// Rate given either in Hz (scaled by 2*pi) or directly in rad/s.
std::optional<double> rate_field(const json& obj, const std::string& path,
                                 const std::string& stem) {
  const auto hz = optional_number(obj, path, stem + "_hz");
  const auto rad = optional_number(obj, path, stem + "_rad_s");
  if (hz && rad) fail(path, "give " + stem + " as _hz or _rad_s, not both");
  if (hz) return kTwoPi * *hz;
  if (rad) return rad;
  return std::nullopt;
}

OscillatorParams parse_oscillator(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"gamma_hz", "gamma_rad_s", "cooperativity", "theta", "theta_pi",
              "gamma0_hz", "gamma0_rad_s", "nbar", "omega_eff_hz",
              "omega_eff_rad_s"});
  const auto gamma = rate_field(obj, path, "gamma");
  const auto coop = optional_number(obj, path, "cooperativity");
  if (gamma && coop) fail(path, "give gamma or cooperativity, not both");
  if (!gamma && !coop) fail(path, "give gamma or cooperativity");

  const auto theta_rad = optional_number(obj, path, "theta");
  const auto theta_pi = optional_number(obj, path, "theta_pi");
  if (theta_rad && theta_pi) fail(path, "give theta or theta_pi, not both");
  if (!theta_rad && !theta_pi) fail(path, "missing theta");
  const double theta = theta_rad ? *theta_rad : *theta_pi * kTwoPi / 2.0;

  const auto gamma0 = rate_field(obj, path, "gamma0");
  if (!gamma0) fail(path, "missing gamma0");
  const double nbar = obj.contains("nbar") ? require_number(obj, path, "nbar") : 0.0;
  const auto omega = rate_field(obj, path, "omega_eff");

  if (coop) {
    return OscillatorParams::from_cooperativity(*coop, theta, *gamma0, nbar, omega);
  }
  OscillatorParams p;
  p.gamma = *gamma;
  p.theta = theta;
  p.gamma0 = *gamma0;
  p.nbar = nbar;
  p.omega_eff = omega;
  return p;
}

AxisSpec parse_axis(const json& obj, const std::string& path) {
  check_keys(obj, path, {"param", "min", "max", "points", "scale"});
  AxisSpec axis;
  if (!obj.contains("param") || !obj["param"].is_string()) {
    fail(path + ".param", "missing or not a string");
  }
  axis.param = obj["param"].get<std::string>();
  axis.min = require_number(obj, path, "min");
  axis.max = require_number(obj, path, "max");
  axis.points = static_cast<int>(require_number(obj, path, "points"));
  if (axis.points < 1) fail(path + ".points", "must be >= 1");
  if (obj.contains("scale")) {
    const std::string scale = obj["scale"].get<std::string>();
    if (scale == "log") {
      axis.log_scale = true;
      if (axis.min <= 0.0 || axis.max <= 0.0) {
        fail(path, "log axis needs positive bounds");
      }
    } else if (scale != "lin") {
      fail(path + ".scale", "expected \"lin\" or \"log\"");
    }
  }
  return axis;
}

ParamBounds parse_bounds(const json& obj, const std::string& path,
                         const std::string& key, ParamBounds fallback) {
  if (!obj.contains(key)) return fallback;
  const json& b = obj[key];
  if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
    fail(path + "." + key, "expected [lo, hi]");
  }
  return {b[0].get<double>(), b[1].get<double>()};
}

OptimizeSpec parse_optimize(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"objective", "mode", "free", "c_plus_bounds", "theta_plus_bounds",
              "theta_minus_bounds", "phi_bounds"});
  OptimizeSpec spec;
  if (obj.contains("objective")) {
    const std::string o = obj["objective"].get<std::string>();
    if (o == "e_plus_given_minus") {
      spec.objective = Objective::EPlusGivenMinus;
    } else if (o == "e_minus_given_plus") {
      spec.objective = Objective::EMinusGivenPlus;
    } else {
      fail(path + ".objective", "expected e_plus_given_minus or e_minus_given_plus");
    }
  }
  if (obj.contains("mode")) {
    const std::string m = obj["mode"].get<std::string>();
    if (m == "free_angles") {
      spec.mode = AngleMode::FreeAngles;
    } else if (m == "symmetric_angles") {
      spec.mode = AngleMode::SymmetricAngles;
    } else {
      fail(path + ".mode", "expected free_angles or symmetric_angles");
    }
  }
  if (obj.contains("free")) {
    if (!obj["free"].is_array()) fail(path + ".free", "expected an array");
    spec.free_c_plus = spec.free_theta_plus = spec.free_theta_minus = false;
    spec.free_phi = false;
    for (const auto& item : obj["free"]) {
      const std::string name = item.get<std::string>();
      if (name == "c_plus") {
        spec.free_c_plus = true;
      } else if (name == "theta_plus") {
        spec.free_theta_plus = true;
      } else if (name == "theta_minus") {
        spec.free_theta_minus = true;
      } else if (name == "phi") {
        spec.free_phi = true;
      } else {
        fail(path + ".free", "unknown free parameter \"" + name + "\"");
      }
    }
  }
  spec.c_plus_bounds = parse_bounds(obj, path, "c_plus_bounds", spec.c_plus_bounds);
  spec.theta_plus_bounds =
      parse_bounds(obj, path, "theta_plus_bounds", spec.theta_plus_bounds);
  spec.theta_minus_bounds =
      parse_bounds(obj, path, "theta_minus_bounds", spec.theta_minus_bounds);
  spec.phi_bounds = parse_bounds(obj, path, "phi_bounds", spec.phi_bounds);
  return spec;
}

OracleSpec parse_oracle(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"kind", "n_configs", "tolerance", "dt", "t_end", "n_traj", "seed",
              "burn_in_fraction"});
  OracleSpec spec;
  if (obj.contains("kind")) {
    const std::string k = obj["kind"].get<std::string>();
    if (k == "lyapunov") {
      spec.kind = OracleSpec::Kind::Lyapunov;
    } else if (k == "mc") {
      spec.kind = OracleSpec::Kind::MonteCarlo;
    } else {
      fail(path + ".kind", "expected \"lyapunov\" or \"mc\"");
    }
  }
  if (const auto v = optional_number(obj, path, "n_configs")) {
    spec.n_configs = static_cast<int>(*v);
  }
  if (const auto v = optional_number(obj, path, "tolerance")) spec.tolerance = *v;
  if (const auto v = optional_number(obj, path, "dt")) spec.sim.dt = *v;
  if (const auto v = optional_number(obj, path, "t_end")) spec.sim.t_end = *v;
  if (const auto v = optional_number(obj, path, "n_traj")) {
    spec.sim.n_traj = static_cast<int>(*v);
  }
  if (const auto v = optional_number(obj, path, "seed")) {
    spec.sim.seed = static_cast<std::uint64_t>(*v);
  }
  if (const auto v = optional_number(obj, path, "burn_in_fraction")) {
    spec.sim.burn_in_fraction = *v;
  }
  return spec;
}

MeasurementModel parse_conditional(const json& obj, const std::string& path) {
  check_keys(obj, path, {"lo_angles", "lo_angles_pi", "efficiency"});
  MeasurementModel m;
  if (obj.contains("lo_angles") && obj.contains("lo_angles_pi")) {
    fail(path, "give lo_angles or lo_angles_pi, not both");
  }
  auto read_angles = [&](const char* key, double scale) {
    if (!obj[key].is_array() || obj[key].empty()) {
      fail(path + "." + key, "expected a non-empty array of numbers");
    }
    m.lo_angles.clear();
    for (const auto& a : obj[key]) {
      if (!a.is_number()) fail(path + "." + key, "expected numbers");
      m.lo_angles.push_back(a.get<double>() * scale);
    }
  };
  if (obj.contains("lo_angles")) read_angles("lo_angles", 1.0);
  if (obj.contains("lo_angles_pi")) read_angles("lo_angles_pi", kTwoPi / 2.0);
  if (const auto v = optional_number(obj, path, "efficiency")) m.efficiency = *v;
  if (m.efficiency < 0.0 || m.efficiency > 1.0) {
    fail(path + ".efficiency", "must lie in [0, 1]");
  }
  return m;
}

}  // namespace

std::vector<double> AxisSpec::values() const {
  std::vector<double> v;
  v.reserve(points);
  if (points == 1) {
    v.push_back(min);
    return v;
  }
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    v.push_back(log_scale ? min * std::pow(max / min, t)
                          : min + (max - min) * t);
  }
  return v;
}

OptimizationProblem OptimizeSpec::problem(const CascadeConfig& base) const {
  OptimizationProblem p;
  p.base = base;
  p.objective = objective;
  p.mode = mode;
  p.free_c_plus = free_c_plus;
  p.free_theta_plus = free_theta_plus;
  p.free_theta_minus = free_theta_minus;
  p.free_phi = free_phi;
  p.c_plus_bounds = c_plus_bounds;
  p.theta_plus_bounds = theta_plus_bounds;
  p.theta_minus_bounds = theta_minus_bounds;
  p.phi_bounds = phi_bounds;
  return p;
}

ScenarioFile parse_scenario(const json& doc) {
  check_keys(doc, "$",
             {"first", "second", "channel", "sweep", "optimize", "oracle",
              "conditional"});
  if (!doc.contains("first") || !doc.contains("second")) {
    fail("$", "missing \"first\" or \"second\" oscillator section");
  }
  ScenarioFile scenario;
  scenario.config.first = parse_oscillator(doc["first"], "first");
  scenario.config.second = parse_oscillator(doc["second"], "second");
  if (doc.contains("channel")) {
    const json& ch = doc["channel"];
    check_keys(ch, "channel", {"epsilon", "phi", "phi_pi"});
    if (const auto v = optional_number(ch, "channel", "epsilon")) {
      scenario.config.channel.epsilon = *v;
    }
    const auto phi = optional_number(ch, "channel", "phi");
    const auto phi_pi = optional_number(ch, "channel", "phi_pi");
    if (phi && phi_pi) fail("channel", "give phi or phi_pi, not both");
    if (phi) scenario.config.channel.phi = *phi;
    if (phi_pi) scenario.config.channel.phi = *phi_pi * kTwoPi / 2.0;
  }
  if (doc.contains("sweep")) {
    const json& sw = doc["sweep"];
    check_keys(sw, "sweep", {"axes"});
    if (!sw.contains("axes") || !sw["axes"].is_array()) {
      fail("sweep.axes", "expected an array");
    }
    int i = 0;
    for (const auto& axis : sw["axes"]) {
      scenario.sweep.push_back(
          parse_axis(axis, "sweep.axes[" + std::to_string(i++) + "]"));
    }
  }
  if (doc.contains("optimize")) {
    scenario.optimize = parse_optimize(doc["optimize"], "optimize");
  }
  if (doc.contains("oracle")) {
    scenario.oracle = parse_oracle(doc["oracle"], "oracle");
  }
  if (doc.contains("conditional")) {
    scenario.conditional = parse_conditional(doc["conditional"], "conditional");
  }
  return scenario;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidParameter("scenario: cannot open " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    throw InvalidParameter(std::string("scenario: malformed JSON: ") + err.what());
  }
  return parse_scenario(doc);
}

void set_parameter(CascadeConfig& c, const std::string& path, double value) {
  const auto dot = path.find('.');
  if (dot == std::string::npos) {
    throw InvalidParameter("parameter path \"" + path + "\" must be section.name");
  }
  const std::string section = path.substr(0, dot);
  const std::string name = path.substr(dot + 1);
  if (section == "channel") {
    if (name == "epsilon") {
      c.channel.epsilon = value;
    } else if (name == "phi") {
      c.channel.phi = value;
    } else {
      throw InvalidParameter("unknown channel parameter \"" + name + "\"");
    }
    return;
  }
  OscillatorParams* osc = nullptr;
  if (section == "first") {
    osc = &c.first;
  } else if (section == "second") {
    osc = &c.second;
  } else {
    throw InvalidParameter("unknown section \"" + section + "\"");
  }
  if (name == "cooperativity") {
    *osc = OscillatorParams::from_cooperativity(value, osc->theta, osc->gamma0,
                                                osc->nbar, osc->omega_eff);
  } else if (name == "theta") {
    osc->theta = value;
  } else if (name == "theta_pi") {
    osc->theta = value * kTwoPi / 2.0;
  } else if (name == "gamma") {
    osc->gamma = value;
  } else if (name == "gamma0") {
    osc->gamma0 = value;
  } else if (name == "nbar") {
    osc->nbar = value;
  } else {
    throw InvalidParameter("unknown oscillator parameter \"" + name + "\"");
  }
}

nlohmann::json config_to_json(const CascadeConfig& c) {
  auto osc = [](const OscillatorParams& p) {
    json j{{"gamma_rad_s", p.gamma},
           {"theta", p.theta},
           {"gamma0_rad_s", p.gamma0},
           {"nbar", p.nbar}};
    if (p.omega_eff) j["omega_eff_rad_s"] = *p.omega_eff;
    return j;
  };
  return json{{"first", osc(c.first)},
              {"second", osc(c.second)},
              {"channel",
               {{"epsilon", c.channel.epsilon}, {"phi", c.channel.phi}}}};
}

}  // namespace steerlab
