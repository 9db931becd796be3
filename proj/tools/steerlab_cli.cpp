#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "steerlab/conditional.hpp"
#include "steerlab/dynamics_oracle.hpp"
#include "steerlab/optimize.hpp"
#include "steerlab/sampling.hpp"
#include "steerlab/scenario.hpp"
#include "steerlab/steering.hpp"

namespace {

using nlohmann::json;
using namespace steerlab;

constexpr const char* kVersion = "0.1.0";

enum ExitCode {
  kExitOk = 0,
  kExitConfig = 2,
  kExitUnstable = 3,
  kExitOracleMismatch = 4,
};

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("STEERLAB_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "steerlab: " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "steerlab[debug]: " << msg << "\n";
}

// 17 significant digits: doubles survive a text round trip losslessly.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CommonArgs {
  std::string scenario_path;
  std::string out_path;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

void write_manifest(const CommonArgs& args, const std::string& command,
                    const ScenarioFile& scenario, std::uint64_t seed,
                    double wall_ms) {
  if (args.out_path.empty()) return;
  json manifest{{"tool", "steerlab"},
                {"version", kVersion},
                {"command", command},
                {"scenario_path", args.scenario_path},
                {"config", config_to_json(scenario.config)},
                {"seed", seed},
                {"threads", args.threads},
                {"format", args.format},
                {"out", args.out_path},
                {"wall_time_ms", wall_ms}};
  std::ofstream out(args.out_path + ".manifest.json");
  out << manifest.dump(2) << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidParameter("cannot open output file " + path);
  return out;
}

int exit_code_for(const ValidationReport& report) {
  if (report.has(ConfigError::UnstableFirst) ||
      report.has(ConfigError::UnstableSecond)) {
    return kExitUnstable;
  }
  return kExitConfig;
}

// Moments through the closed form when possible, the Lyapunov solve for
// rotated channels.
std::pair<SteadyStateMoments, std::string> point_moments(const CascadeConfig& c) {
  if (c.channel.phi == 0.0) return {rwa_moments(c), "closed_form"};
  const Eigen::Matrix4d v = solve_lyapunov(build_drift_diffusion(c));
  return {moments_from_covariance(v), "lyapunov"};
}

int cmd_eval(const CommonArgs& args) {
  const ScenarioFile scenario = load_scenario(args.scenario_path);
  const ValidationReport report = validate(scenario.config);
  for (const auto& [_, msg] : report.warnings) log_info("warning: " + msg);
  if (!report.ok()) {
    for (const auto& [_, msg] : report.errors) std::cerr << "error: " << msg << "\n";
    return exit_code_for(report);
  }
  const auto [m, source] = point_moments(scenario.config);
  const SteeringReport steer = steering_parameters(m);
  const DirectionalCoupling dc = directional_coupling(scenario.config);

  if (args.format == "json") {
    json doc{{"moments",
              {{"var_xm", m.var_xm},
               {"var_pm", m.var_pm},
               {"var_xp", m.var_xp},
               {"var_pp", m.var_pp},
               {"cov_xx", m.cov_xx},
               {"cov_pp", m.cov_pp},
               {"bare_var_p", m.bare_var_p}}},
             {"steering",
              {{"e_plus_given_minus", steer.e_plus_given_minus},
               {"e_minus_given_plus", steer.e_minus_given_plus},
               {"gain_x", steer.gain_x},
               {"gain_p", steer.gain_p},
               {"classification", to_string(steer.classification)},
               {"class_code", class_code(steer.classification)}}},
             {"directional_coupling", {{"rate_rad_s", dc.rate}, {"f", dc.f}}},
             {"moment_source", source}};
    if (steer.ratio_defined) doc["steering"]["ratio"] = steer.ratio;
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "moment_source = " << source << "\n"
              << "var_xm = " << fmt(m.var_xm) << "\n"
              << "var_xp = " << fmt(m.var_xp) << "\n"
              << "cov_xx = " << fmt(m.cov_xx) << "\n"
              << "bare_var_p = " << fmt(m.bare_var_p) << "\n"
              << "R = " << fmt(dc.rate) << " rad/s, f = " << fmt(dc.f) << "\n"
              << "E_plus_given_minus = " << fmt(steer.e_plus_given_minus) << "\n"
              << "E_minus_given_plus = " << fmt(steer.e_minus_given_plus) << "\n"
              << "gain = " << fmt(steer.gain_x) << "\n"
              << "classification = " << to_string(steer.classification) << "\n";
  }
  if (!args.out_path.empty()) {
    auto out = open_out(args.out_path);
    out << "e_pm,e_mp,gain,class,var_xm,var_xp,cov_xx,bare_var_p\n"
        << fmt(steer.e_plus_given_minus) << ',' << fmt(steer.e_minus_given_plus)
        << ',' << fmt(steer.gain_x) << ',' << class_code(steer.classification)
        << ',' << fmt(m.var_xm) << ',' << fmt(m.var_xp) << ',' << fmt(m.cov_xx)
        << ',' << fmt(m.bare_var_p) << "\n";
  }
  return kExitOk;
}

int cmd_contour(const CommonArgs& args) {
  Timer timer;
  const ScenarioFile scenario = load_scenario(args.scenario_path);
  if (scenario.sweep.size() != 2) {
    std::cerr << "error: contour needs exactly two sweep axes\n";
    return kExitConfig;
  }
  if (args.out_path.empty()) {
    std::cerr << "error: contour needs --out\n";
    return kExitConfig;
  }
  const std::vector<double> axis1 = scenario.sweep[0].values();
  const std::vector<double> axis2 = scenario.sweep[1].values();
  struct Row {
    double a1, a2, e_pm, e_mp;
    int cls;
  };
  std::vector<Row> rows(axis1.size() * axis2.size());

  auto eval_row = [&](std::size_t flat) {
    const std::size_t i = flat / axis2.size();
    const std::size_t j = flat % axis2.size();
    CascadeConfig c = scenario.config;
    Row row{axis1[i], axis2[j], 0.0, 0.0, -1};
    try {
      set_parameter(c, scenario.sweep[0].param, axis1[i]);
      set_parameter(c, scenario.sweep[1].param, axis2[j]);
      const auto [m, _] = point_moments(c);
      const SteeringReport steer = steering_parameters(m);
      row.e_pm = steer.e_plus_given_minus;
      row.e_mp = steer.e_minus_given_plus;
      row.cls = class_code(steer.classification);
    } catch (const UnstableConfig&) {
      row.e_pm = row.e_mp = std::numeric_limits<double>::quiet_NaN();
      row.cls = -1;
    }
    rows[flat] = row;
  };

  const int n_threads = std::max(1, args.threads);
  if (n_threads == 1) {
    for (std::size_t k = 0; k < rows.size(); ++k) eval_row(k);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (rows.size() + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(rows.size(), begin + chunk);
      if (begin < end) {
        pool.emplace_back([&, begin, end] {
          for (std::size_t k = begin; k < end; ++k) eval_row(k);
        });
      }
    }
    for (auto& t : pool) t.join();
  }

  auto out = open_out(args.out_path);
  out << "# steerlab contour: axis1=" << scenario.sweep[0].param
      << " axis2=" << scenario.sweep[1].param << "\n"
      << "# class: 0=none 1=minus_to_plus 2=plus_to_minus 3=two_way -1=unstable\n"
      << "axis1,axis2,e_pm,e_mp,class\n";
  for (const Row& r : rows) {
    out << fmt(r.a1) << ',' << fmt(r.a2) << ',' << fmt(r.e_pm) << ','
        << fmt(r.e_mp) << ',' << r.cls << "\n";
  }
  log_info("contour: " + std::to_string(rows.size()) + " points in " +
           std::to_string(timer.ms()) + " ms");
  return kExitOk;
}

std::vector<double> c_minus_grid_from(const ScenarioFile& scenario) {
  for (const AxisSpec& axis : scenario.sweep) {
    if (axis.param == "first.cooperativity") return axis.values();
  }
  throw InvalidParameter(
      "optimize/conditional sweeps need a first.cooperativity axis");
}

int cmd_optimize(const CommonArgs& args) {
  Timer timer;
  const ScenarioFile scenario = load_scenario(args.scenario_path);
  if (!scenario.optimize) {
    std::cerr << "error: scenario has no optimize section\n";
    return kExitConfig;
  }
  if (args.out_path.empty()) {
    std::cerr << "error: optimize needs --out\n";
    return kExitConfig;
  }
  const std::vector<double> grid = c_minus_grid_from(scenario);
  const OptimizationProblem proto = scenario.optimize->problem(scenario.config);
  const std::vector<CurvePoint> curve = optimal_curve(grid, proto);

  auto out = open_out(args.out_path);
  out << "# steerlab optimal curve; objective="
      << (proto.objective == Objective::EPlusGivenMinus ? "e_plus_given_minus"
                                                        : "e_minus_given_plus")
      << " epsilon=" << fmt(scenario.config.channel.epsilon) << "\n"
      << "mode,c_minus,e_opt,theta_minus,theta_plus,c_plus_ratio,class,on_bound,"
         "converged\n";
  for (const CurvePoint& pt : curve) {
    out << (pt.mode == AngleMode::FreeAngles ? "free" : "symmetric") << ','
        << fmt(pt.c_minus) << ',' << fmt(pt.e_opt) << ',' << fmt(pt.theta_minus)
        << ',' << fmt(pt.theta_plus) << ',' << fmt(pt.c_plus_ratio) << ','
        << class_code(pt.classification) << ',' << (pt.on_bound ? 1 : 0) << ','
        << (pt.converged ? 1 : 0) << "\n";
  }
  write_manifest(args, "optimize", scenario, args.seed.value_or(0), timer.ms());
  log_info("optimize: " + std::to_string(curve.size()) + " points in " +
           std::to_string(timer.ms()) + " ms");
  return kExitOk;
}

int cmd_losssweep(const CommonArgs& args) {
  Timer timer;
  const ScenarioFile scenario = load_scenario(args.scenario_path);
  if (!scenario.optimize) {
    std::cerr << "error: scenario has no optimize section\n";
    return kExitConfig;
  }
  if (args.out_path.empty()) {
    std::cerr << "error: losssweep needs --out\n";
    return kExitConfig;
  }
  OptimizationProblem proto = scenario.optimize->problem(scenario.config);

  std::vector<double> eps_grid;
  for (const AxisSpec& axis : scenario.sweep) {
    if (axis.param == "channel.epsilon") eps_grid = axis.values();
  }
  if (eps_grid.empty()) {
    for (int i = 0; i <= 19; ++i) eps_grid.push_back(i * 0.05);
  }

  const double eps_max = loss_tolerance(proto, 0.5);

  auto out = open_out(args.out_path);
  out << "# steerlab loss sweep; optimized "
      << (proto.objective == Objective::EPlusGivenMinus ? "e_plus_given_minus"
                                                        : "e_minus_given_plus")
      << " per epsilon\n"
      << "# eps_max = " << fmt(eps_max) << " (threshold 0.5)\n"
      << "epsilon,e_opt,theta_minus,theta_plus,c_plus_ratio,on_bound\n";
  std::vector<double> warm;
  for (double eps : eps_grid) {
    OptimizationProblem p = proto;
    p.base.channel.epsilon = eps;
    try {
      const OptResult r = minimize(p, {warm});
      const double gt0 = r.optimum.second.thermal_decoherence();
      const double c_plus = gt0 > 0.0 ? r.optimum.second.gamma / gt0 : 0.0;
      const double c_minus = r.optimum.first.thermal_decoherence() > 0.0
                                 ? r.optimum.first.gamma /
                                       r.optimum.first.thermal_decoherence()
                                 : 0.0;
      out << fmt(eps) << ',' << fmt(r.e_opt) << ',' << fmt(r.optimum.first.theta)
          << ',' << fmt(r.optimum.second.theta) << ','
          << fmt(c_minus > 0.0 ? c_plus / c_minus : 0.0) << ','
          << (r.on_bound ? 1 : 0) << "\n";
    } catch (const EmptyFeasibleSet&) {
      out << fmt(eps) << ",nan,nan,nan,nan,0\n";
    }
  }
  std::cout << "eps_max = " << fmt(eps_max) << "\n";
  write_manifest(args, "losssweep", scenario, args.seed.value_or(0), timer.ms());
  return kExitOk;
}

int cmd_oracle(const CommonArgs& args) {
  Timer timer;
  const ScenarioFile scenario = load_scenario(args.scenario_path);
  OracleSpec spec = scenario.oracle.value_or(OracleSpec{});
  if (args.seed) spec.sim.seed = *args.seed;
  spec.sim.threads = args.threads;

  if (spec.kind == OracleSpec::Kind::MonteCarlo) {
    const ValidationReport report = validate(scenario.config);
    if (!report.ok()) {
      for (const auto& [_, msg] : report.errors) {
        std::cerr << "error: " << msg << "\n";
      }
      return exit_code_for(report);
    }
    const DriftDiffusion dd = build_drift_diffusion(scenario.config);
    const Eigen::Matrix4d v = solve_lyapunov(dd);
    const SimulationResult sim = simulate_sde(scenario.config, spec.sim);
    double worst_z = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double se = sim.std_error(i, j);
        if (se > 0.0) {
          worst_z = std::max(worst_z,
                             std::abs(sim.covariance(i, j) - v(i, j)) / se);
        }
      }
    }
    if (!args.out_path.empty()) {
      auto out = open_out(args.out_path);
      out << "# steerlab mc oracle; seed=" << sim.seed << " n_traj=" << sim.n_traj
          << " dt=" << fmt(sim.dt) << " t_end=" << fmt(sim.t_end) << "\n"
          << "i,j,mc,std_err,lyapunov,z\n";
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          const double se = sim.std_error(i, j);
          out << i << ',' << j << ',' << fmt(sim.covariance(i, j)) << ','
              << fmt(se) << ',' << fmt(v(i, j)) << ','
              << fmt(se > 0.0 ? (sim.covariance(i, j) - v(i, j)) / se : 0.0)
              << "\n";
        }
      }
    }
    std::cout << "max |z| = " << fmt(worst_z) << " (3-sigma gate)\n";
    write_manifest(args, "oracle", scenario, spec.sim.seed, timer.ms());
    return worst_z <= 3.0 ? kExitOk : kExitOracleMismatch;
  }

  // Lyapunov batch over random stable configurations.
  std::mt19937_64 rng(spec.sim.seed);
  double worst = 0.0;
  std::ofstream out;
  if (!args.out_path.empty()) {
    out = open_out(args.out_path);
    out << "# steerlab lyapunov oracle batch; seed=" << spec.sim.seed << "\n"
        << "c_minus,c_plus,theta_minus,theta_plus,epsilon,max_rel_dev\n";
  }
  for (int k = 0; k < spec.n_configs; ++k) {
    const CascadeConfig c = sample_stable_config(rng);
    const SteadyStateMoments m = rwa_moments(c);
    const Eigen::Matrix4d analytic = covariance_matrix(m);
    const Eigen::Matrix4d v = solve_lyapunov(build_drift_diffusion(c));
    double dev = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double denom =
            std::max(std::abs(analytic(i, j)), 1e-12 * analytic.norm());
        dev = std::max(dev, std::abs(v(i, j) - analytic(i, j)) / denom);
      }
    }
    worst = std::max(worst, dev);
    if (out.is_open()) {
      const DerivedRates rm = derived_rates(c.first);
      const DerivedRates rp = derived_rates(c.second);
      out << fmt(rm.cooperativity) << ',' << fmt(rp.cooperativity) << ','
          << fmt(c.first.theta) << ',' << fmt(c.second.theta) << ','
          << fmt(c.channel.epsilon) << ',' << fmt(dev) << "\n";
    }
  }
  std::cout << "max relative deviation = " << fmt(worst) << " over "
            << spec.n_configs << " configs (tolerance " << fmt(spec.tolerance)
            << ")\n";
  write_manifest(args, "oracle", scenario, spec.sim.seed, timer.ms());
  return worst <= spec.tolerance ? kExitOk : kExitOracleMismatch;
}

int cmd_conditional(const CommonArgs& args) {
  Timer timer;
  const ScenarioFile scenario = load_scenario(args.scenario_path);
  const MeasurementModel model = scenario.conditional.value_or(MeasurementModel{});

  if (scenario.optimize && !scenario.sweep.empty()) {
    if (args.out_path.empty()) {
      std::cerr << "error: conditional sweeps need --out\n";
      return kExitConfig;
    }
    const std::vector<double> grid = c_minus_grid_from(scenario);
    OptimizationProblem proto = scenario.optimize->problem(scenario.config);
    auto out = open_out(args.out_path);
    out << "# steerlab conditional vs unconditional at optimized points\n"
        << "c_minus,e_uncond,e_cond,d_pm,d_mp,ordering_min_eig\n";
    std::vector<double> warm;
    double worst_d = 0.0;
    for (double c_minus : grid) {
      OptimizationProblem p = proto;
      p.mode = AngleMode::FreeAngles;
      {
        const OscillatorParams& f = p.base.first;
        p.base.first = OscillatorParams::from_cooperativity(
            c_minus, f.theta, f.gamma0, f.nbar, f.omega_eff);
      }
      const OptResult r = minimize(p, {warm});
      warm.clear();
      const ConditionalResult cond = solve_conditional(r.optimum, model);
      worst_d = std::max(worst_d, cond.d_pm);
      out << fmt(c_minus) << ',' << fmt(cond.e_pm_uncond) << ','
          << fmt(cond.e_pm_cond) << ',' << fmt(cond.d_pm) << ',' << fmt(cond.d_mp)
          << ',' << fmt(cond.ordering_min_eig) << "\n";
    }
    std::cout << "max d(E+|-) over the grid = " << fmt(worst_d) << "\n";
    write_manifest(args, "conditional", scenario, args.seed.value_or(0),
                   timer.ms());
    return kExitOk;
  }

  const ValidationReport report = validate(scenario.config);
  if (!report.ok()) {
    for (const auto& [_, msg] : report.errors) std::cerr << "error: " << msg << "\n";
    return exit_code_for(report);
  }
  const ConditionalResult cond = solve_conditional(scenario.config, model);
  std::cout << "E_pm unconditional = " << fmt(cond.e_pm_uncond) << "\n"
            << "E_pm conditional   = " << fmt(cond.e_pm_cond) << "\n"
            << "d_pm = " << fmt(cond.d_pm) << "\n"
            << "d_mp = " << fmt(cond.d_mp) << "\n"
            << "ordering_min_eig = " << fmt(cond.ordering_min_eig) << "\n";
  if (!args.out_path.empty()) {
    auto out = open_out(args.out_path);
    out << "e_uncond,e_cond,d_pm,d_mp,ordering_min_eig\n"
        << fmt(cond.e_pm_uncond) << ',' << fmt(cond.e_pm_cond) << ','
        << fmt(cond.d_pm) << ',' << fmt(cond.d_mp) << ','
        << fmt(cond.ordering_min_eig) << "\n";
    write_manifest(args, "conditional", scenario, args.seed.value_or(0),
                   timer.ms());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steerlab: steady-state EPR steering in cascaded oscillator pairs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* cmd, bool need_scenario = true) {
    auto* opt = cmd->add_option("--scenario", args.scenario_path,
                                "scenario JSON file");
    if (need_scenario) opt->required();
    cmd->add_option("--out", args.out_path, "output CSV path");
    cmd->add_option("--threads", args.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    std::uint64_t seed_value = 0;
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&args](std::uint64_t s) { args.seed = s; },
        "override the random seed");
    (void)seed_value;
    cmd->add_option("--format", args.format, "stdout format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* eval = app.add_subcommand("eval", "single-point moments and steering");
  add_common(eval);
  auto* contour = app.add_subcommand("contour", "two-axis steering map CSV");
  add_common(contour);
  auto* optimize = app.add_subcommand("optimize", "optimal steering curve vs C-");
  add_common(optimize);
  auto* losssweep =
      app.add_subcommand("losssweep", "optimized steering vs transmission loss");
  add_common(losssweep);
  auto* oracle =
      app.add_subcommand("oracle", "closed form vs Lyapunov/Monte-Carlo check");
  add_common(oracle);
  auto* conditional =
      app.add_subcommand("conditional", "measurement-conditioned comparison");
  add_common(conditional);

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval->parsed()) return cmd_eval(args);
    if (contour->parsed()) return cmd_contour(args);
    if (optimize->parsed()) return cmd_optimize(args);
    if (losssweep->parsed()) return cmd_losssweep(args);
    if (oracle->parsed()) return cmd_oracle(args);
    if (conditional->parsed()) return cmd_conditional(args);
  } catch (const UnstableConfig& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUnstable;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
