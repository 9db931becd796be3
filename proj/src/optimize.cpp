#include "steerlab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steerlab/conditional.hpp"
#include "steerlab/dynamics_oracle.hpp"

namespace steerlab {

namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();
constexpr double kPi = kTwoPi / 2.0;

enum class Dim { LogCouplingMinus, LogCoupling, ThetaMinus, ThetaPlus, ThetaCommon, Phi };

struct FreeDim {
  Dim kind;
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;
};

struct Landscape {
  const OptimizationProblem* problem = nullptr;
  std::vector<FreeDim> dims;
  bool coupling_is_cooperativity = true;
  mutable long evaluations = 0;

  CascadeConfig config_at(const std::vector<double>& x) const {
    CascadeConfig c = problem->base;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      switch (dims[i].kind) {
        case Dim::LogCouplingMinus: {
          const double value = std::pow(10.0, x[i]);
          if (c.first.thermal_decoherence() > 0.0) {
            c.first = OscillatorParams::from_cooperativity(
                value, c.first.theta, c.first.gamma0, c.first.nbar,
                c.first.omega_eff);
          } else {
            c.first.gamma = value;
          }
          break;
        }
        case Dim::LogCoupling: {
          const double value = std::pow(10.0, x[i]);
          if (coupling_is_cooperativity) {
            c.second = OscillatorParams::from_cooperativity(
                value, c.second.theta, c.second.gamma0, c.second.nbar,
                c.second.omega_eff);
          } else {
            c.second.gamma = value;
          }
          break;
        }
        case Dim::ThetaMinus:
          c.first.theta = x[i];
          break;
        case Dim::ThetaPlus:
          c.second.theta = x[i];
          break;
        case Dim::ThetaCommon:
          c.first.theta = x[i];
          c.second.theta = x[i];
          break;
        case Dim::Phi:
          c.channel.phi = x[i];
          break;
      }
    }
    return c;
  }

  bool feasible(const CascadeConfig& c) const {
    const DerivedRates rm = derived_rates(c.first);
    const DerivedRates rp = derived_rates(c.second);
    const double margin_m =
        problem->stability_margin_rel * std::max(c.first.gamma, c.first.gamma0);
    const double margin_p =
        problem->stability_margin_rel * std::max(c.second.gamma, c.second.gamma0);
    return rm.gamma_total >= margin_m && rp.gamma_total >= margin_p &&
           rm.gamma_total > 0.0 && rp.gamma_total > 0.0;
  }

  double operator()(const std::vector<double>& x) const {
    ++evaluations;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (x[i] < dims[i].lo || x[i] > dims[i].hi) return kInfeasible;
    }
    const CascadeConfig c = config_at(x);
    if (!feasible(c)) return kInfeasible;
    double e_pm = 0.0;
    double e_mp = 0.0;
    if (c.channel.phi == 0.0 && !problem->free_phi) {
      const SteeringReport rep = steering_parameters(rwa_moments(c));
      e_pm = rep.e_plus_given_minus;
      e_mp = rep.e_minus_given_plus;
    } else {
      // rotated channel: no closed form, go through the oracle
      const Eigen::Matrix4d v = solve_lyapunov(build_drift_diffusion(c));
      std::tie(e_pm, e_mp) = steering_from_covariance(v);
    }
    return problem->objective == Objective::EPlusGivenMinus ? e_pm : e_mp;
  }
};

Landscape make_landscape(const OptimizationProblem& p) {
  Landscape ls;
  ls.problem = &p;
  const double gt0p = p.base.second.thermal_decoherence();
  ls.coupling_is_cooperativity = gt0p > 0.0;
  if (p.free_c_minus) {
    const double scale =
        p.base.second.thermal_decoherence() > 0.0
            ? p.base.second.gamma / p.base.second.thermal_decoherence()
            : 1.0;
    double lo = p.c_minus_bounds.lo;
    double hi = p.c_minus_bounds.hi;
    if (lo <= 0.0) lo = std::max(1e-3, 1e-4 * scale);
    if (hi <= 0.0) hi = 1e4 * std::max(scale, 1e-3);
    const double llo = std::log10(lo);
    const double lhi = std::log10(hi);
    const int points = std::clamp(
        static_cast<int>(std::ceil((lhi - llo) * p.cooperativity_points_per_decade)) + 1,
        17, 257);
    ls.dims.push_back({Dim::LogCouplingMinus, llo, lhi, points});
  }
  if (p.free_c_plus) {
    const double c_minus_scale =
        p.base.first.thermal_decoherence() > 0.0
            ? p.base.first.gamma / p.base.first.thermal_decoherence()
            : 1.0;
    double lo = p.c_plus_bounds.lo;
    double hi = p.c_plus_bounds.hi;
    if (lo <= 0.0) lo = std::max(1e-3, 1e-4 * c_minus_scale);
    if (hi <= 0.0) hi = 1e4 * std::max(c_minus_scale, 1e-3);
    if (!ls.coupling_is_cooperativity) {
      // bounds are on Gamma+ directly; reuse the same defaults scaled by
      // the upstream coupling rate
      if (p.c_plus_bounds.lo <= 0.0) lo = std::max(1e-6, 1e-4 * p.base.first.gamma);
      if (p.c_plus_bounds.hi <= 0.0) hi = 1e4 * std::max(p.base.first.gamma, 1e-6);
    }
    const double llo = std::log10(lo);
    const double lhi = std::log10(hi);
    const int points = std::clamp(
        static_cast<int>(std::ceil((lhi - llo) * p.cooperativity_points_per_decade)) + 1,
        17, 257);
    ls.dims.push_back({Dim::LogCoupling, llo, lhi, points});
  }
  if (p.mode == AngleMode::SymmetricAngles) {
    if (p.free_theta_minus || p.free_theta_plus) {
      const double lo = std::max(p.theta_minus_bounds.lo, p.theta_plus_bounds.lo);
      const double hi = std::min(p.theta_minus_bounds.hi, p.theta_plus_bounds.hi);
      ls.dims.push_back({Dim::ThetaCommon, lo, hi, p.angle_points});
    }
  } else {
    if (p.free_theta_minus) {
      ls.dims.push_back({Dim::ThetaMinus, p.theta_minus_bounds.lo,
                         p.theta_minus_bounds.hi, p.angle_points});
    }
    if (p.free_theta_plus) {
      ls.dims.push_back({Dim::ThetaPlus, p.theta_plus_bounds.lo,
                         p.theta_plus_bounds.hi, p.angle_points});
    }
  }
  if (p.free_phi) {
    ls.dims.push_back({Dim::Phi, p.phi_bounds.lo, p.phi_bounds.hi, p.angle_points});
  }
  return ls;
}

// Row-major tensor scan over [lo_i, hi_i] with n_i points per dim; ties keep
// the first hit so reruns are reproducible.
bool grid_scan(const Landscape& ls, const std::vector<double>& lo,
               const std::vector<double>& hi, const std::vector<int>& points,
               std::vector<double>& best_x, double& best_f) {
  const std::size_t ndim = ls.dims.size();
  std::vector<int> idx(ndim, 0);
  std::vector<double> x(ndim);
  bool found = false;
  while (true) {
    for (std::size_t i = 0; i < ndim; ++i) {
      x[i] = points[i] > 1
                 ? lo[i] + (hi[i] - lo[i]) * idx[i] / double(points[i] - 1)
                 : 0.5 * (lo[i] + hi[i]);
    }
    const double f = ls(x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
      found = true;
    }
    std::size_t d = ndim;
    while (d > 0) {
      --d;
      if (++idx[d] < points[d]) break;
      idx[d] = 0;
      if (d == 0) return found || best_f < kInfeasible;
    }
    if (d == 0 && idx[0] == 0) return found || best_f < kInfeasible;
  }
}

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2) with deterministic ordering; infeasible points carry +inf.
void nelder_mead(const Landscape& ls, std::vector<double>& x, double& f,
                 const std::vector<double>& step, double tol, int max_iter,
                 bool& converged) {
  const std::size_t n = x.size();
  converged = false;
  if (n == 0) {
    converged = true;
    return;
  }
  std::vector<std::vector<double>> pts(n + 1, x);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] = std::clamp(pts[i + 1][i] + step[i], ls.dims[i].lo, ls.dims[i].hi);
    if (pts[i + 1][i] == x[i]) {
      pts[i + 1][i] = std::clamp(x[i] - step[i], ls.dims[i].lo, ls.dims[i].hi);
    }
  }
  for (std::size_t i = 0; i <= n; ++i) vals[i] = ls(pts[i]);

  std::vector<std::size_t> order(n + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const double f_best = vals[order[0]];
    const double f_worst = vals[order[n]];
    if (std::isfinite(f_best) && std::isfinite(f_worst) &&
        f_worst - f_best <= tol * std::max(std::abs(f_best), 1e-30)) {
      converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[order[i]][k];
    }
    for (double& v : centroid) v /= double(n);
    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) {
        p[k] = centroid[k] + coef * (centroid[k] - pts[order[n]][k]);
      }
      return p;
    };
    const std::vector<double> refl = blend(1.0);
    const double f_refl = ls(refl);
    if (f_refl < vals[order[0]]) {
      const std::vector<double> exp_pt = blend(2.0);
      const double f_exp = ls(exp_pt);
      if (f_exp < f_refl) {
        pts[order[n]] = exp_pt;
        vals[order[n]] = f_exp;
      } else {
        pts[order[n]] = refl;
        vals[order[n]] = f_refl;
      }
      continue;
    }
    if (f_refl < vals[order[n - 1]]) {
      pts[order[n]] = refl;
      vals[order[n]] = f_refl;
      continue;
    }
    const std::vector<double> contr = blend(f_refl < vals[order[n]] ? 0.5 : -0.5);
    const double f_contr = ls(contr);
    if (f_contr < std::min(f_refl, vals[order[n]])) {
      pts[order[n]] = contr;
      vals[order[n]] = f_contr;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        pts[order[i]][k] = 0.5 * (pts[order[i]][k] + pts[order[0]][k]);
      }
      vals[order[i]] = ls(pts[order[i]]);
    }
  }
  std::size_t arg = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (vals[i] < vals[arg]) arg = i;
  }
  if (vals[arg] < f) {
    f = vals[arg];
    x = pts[arg];
  }
}

OptResult finish_result(const Landscape& ls, const std::vector<double>& x, double f,
                        bool converged, std::vector<double> trace) {
  OptResult r;
  r.optimum = ls.config_at(x);
  r.e_opt = f;
  r.evaluations = ls.evaluations;
  r.converged = converged;
  r.free_values = x;
  r.trace = std::move(trace);
  double e_pm = 0.0;
  double e_mp = 0.0;
  if (r.optimum.channel.phi == 0.0) {
    const SteeringReport rep = steering_parameters(rwa_moments(r.optimum));
    e_pm = rep.e_plus_given_minus;
    e_mp = rep.e_minus_given_plus;
  } else {
    std::tie(e_pm, e_mp) =
        steering_from_covariance(solve_lyapunov(build_drift_diffusion(r.optimum)));
  }
  r.classification = classify(e_pm, e_mp);
  for (std::size_t i = 0; i < ls.dims.size(); ++i) {
    const double range = ls.dims[i].hi - ls.dims[i].lo;
    if (range <= 0.0) continue;
    if (x[i] - ls.dims[i].lo <= 1e-6 * range || ls.dims[i].hi - x[i] <= 1e-6 * range) {
      r.on_bound = true;
    }
  }
  return r;
}

}  // namespace

OptResult minimize(const OptimizationProblem& p) { return minimize(p, {}); }

OptResult minimize(const OptimizationProblem& p,
                   const std::vector<std::vector<double>>& warm_starts) {
  const Landscape ls = make_landscape(p);
  const std::size_t ndim = ls.dims.size();
  std::vector<double> trace;

  std::vector<double> lo(ndim), hi(ndim);
  std::vector<int> points(ndim);
  for (std::size_t i = 0; i < ndim; ++i) {
    lo[i] = ls.dims[i].lo;
    hi[i] = ls.dims[i].hi;
    points[i] = ls.dims[i].points;
  }

  std::vector<double> best_x(ndim, 0.0);
  double best_f = kInfeasible;
  if (ndim == 0) {
    best_f = ls(best_x);
    if (!std::isfinite(best_f)) {
      throw EmptyFeasibleSet("fixed configuration violates the stability margin");
    }
    return finish_result(ls, best_x, best_f, true, {best_f});
  }

  // Cap the coarse tensor scan; extra resolution comes from the refinement
  // rounds and the simplex polish anyway.
  constexpr long kMaxCoarseEvals = 500000;
  while (true) {
    long product = 1;
    std::size_t largest = 0;
    for (std::size_t i = 0; i < ndim; ++i) {
      product *= points[i];
      if (points[i] > points[largest]) largest = i;
    }
    if (product <= kMaxCoarseEvals || points[largest] <= 9) break;
    points[largest] = std::max(9, points[largest] / 2 + 1);
  }

  grid_scan(ls, lo, hi, points, best_x, best_f);
  if (!std::isfinite(best_f)) {
    throw EmptyFeasibleSet("no stable point inside the optimization box");
  }
  trace.push_back(best_f);

  std::vector<double> cell(ndim);
  for (std::size_t i = 0; i < ndim; ++i) {
    cell[i] = (hi[i] - lo[i]) / std::max(1, points[i] - 1);
  }
  for (int round = 0; round < p.refine_rounds; ++round) {
    std::vector<double> rlo(ndim), rhi(ndim);
    std::vector<int> rpts(ndim, p.refine_points);
    for (std::size_t i = 0; i < ndim; ++i) {
      rlo[i] = std::max(ls.dims[i].lo, best_x[i] - 1.8 * cell[i]);
      rhi[i] = std::min(ls.dims[i].hi, best_x[i] + 1.8 * cell[i]);
      cell[i] = (rhi[i] - rlo[i]) / std::max(1, p.refine_points - 1);
    }
    grid_scan(ls, rlo, rhi, rpts, best_x, best_f);
    trace.push_back(best_f);
  }

  bool converged = false;
  std::vector<double> step(ndim);
  for (std::size_t i = 0; i < ndim; ++i) step[i] = std::max(cell[i], 1e-9);
  nelder_mead(ls, best_x, best_f, step, p.polish_tol, 600, converged);
  for (const std::vector<double>& warm : warm_starts) {
    if (warm.size() != ndim) continue;
    std::vector<double> wx = warm;
    for (std::size_t i = 0; i < ndim; ++i) {
      wx[i] = std::clamp(wx[i], ls.dims[i].lo, ls.dims[i].hi);
    }
    double wf = ls(wx);
    if (!std::isfinite(wf)) continue;
    std::vector<double> wstep(ndim);
    for (std::size_t i = 0; i < ndim; ++i) {
      wstep[i] = std::max(1e-4 * (ls.dims[i].hi - ls.dims[i].lo), 1e-9);
    }
    bool wconv = false;
    nelder_mead(ls, wx, wf, wstep, p.polish_tol, 600, wconv);
    if (wf < best_f) {
      best_f = wf;
      best_x = wx;
      converged = wconv;
    }
  }
  trace.push_back(best_f);
  return finish_result(ls, best_x, best_f, converged, std::move(trace));
}

CascadeConfig scenario_config(ThermalScenario s, double c_minus, double c_plus,
                              double theta_minus, double theta_plus,
                              double epsilon, double phi) {
  const double gamma0_hot = kTwoPi * 0.1;
  const double nbar_hot = 1e5;
  CascadeConfig c;
  c.first = OscillatorParams::from_cooperativity(c_minus, theta_minus, gamma0_hot,
                                                 nbar_hot);
  if (s == ThermalScenario::HotHot) {
    c.second = OscillatorParams::from_cooperativity(c_plus, theta_plus, gamma0_hot,
                                                    nbar_hot);
  } else {
    // vacuum-bath server with the same decoherence rate gamma_tilde0
    c.second = OscillatorParams::from_cooperativity(c_plus, theta_plus,
                                                    kTwoPi * 2e4, 0.0);
  }
  c.channel.epsilon = epsilon;
  c.channel.phi = phi;
  return c;
}

namespace {

void set_c_minus(OptimizationProblem& p, double c_minus) {
  const OscillatorParams& f = p.base.first;
  if (f.thermal_decoherence() <= 0.0) {
    throw InvalidParameter(
        "a C- sweep needs a nonzero upstream thermal decoherence rate");
  }
  p.base.first = OscillatorParams::from_cooperativity(c_minus, f.theta, f.gamma0,
                                                      f.nbar, f.omega_eff);
}

}  // namespace

namespace {

CurvePoint curve_point(const OptimizationProblem& p, double c_minus,
                       const std::vector<std::vector<double>>& warm_starts,
                       std::vector<double>& free_values_out) {
  CurvePoint pt;
  pt.c_minus = c_minus;
  pt.mode = p.mode;
  try {
    const OptResult r = minimize(p, warm_starts);
    free_values_out = r.free_values;
    pt.e_opt = r.e_opt;
    pt.theta_minus = r.optimum.first.theta;
    pt.theta_plus = r.optimum.second.theta;
    const double gt0 = r.optimum.second.thermal_decoherence();
    const double c_plus = gt0 > 0.0 ? r.optimum.second.gamma / gt0 : 0.0;
    pt.c_plus_ratio = c_plus / c_minus;
    pt.classification = r.classification;
    pt.on_bound = r.on_bound;
    pt.converged = r.converged;
  } catch (const EmptyFeasibleSet&) {
    pt.e_opt = std::numeric_limits<double>::quiet_NaN();
    pt.converged = false;
    free_values_out.clear();
  }
  return pt;
}

// Symmetric coordinates (log C+, theta) seed the free-angle polish at
// (log C+, theta, theta), so the free optimum can never trail the symmetric
// one at the same grid point.
std::vector<double> expand_symmetric(const std::vector<double>& sym,
                                     const OptimizationProblem& proto) {
  if (!proto.free_c_plus || !proto.free_theta_minus || !proto.free_theta_plus ||
      proto.free_c_minus) {
    return {};
  }
  const std::size_t expect = 2 + (proto.free_phi ? 1 : 0);
  if (sym.size() != expect) return {};
  std::vector<double> x{sym[0], sym[1], sym[1]};
  if (proto.free_phi) x.push_back(sym[2]);
  return x;
}

}  // namespace

std::vector<CurvePoint> optimal_curve(std::span<const double> c_minus_grid,
                                      const OptimizationProblem& proto) {
  std::vector<CurvePoint> symmetric_curve;
  std::vector<std::vector<double>> symmetric_values;
  {
    std::vector<double> warm;
    for (double c_minus : c_minus_grid) {
      OptimizationProblem p = proto;
      p.mode = AngleMode::SymmetricAngles;
      set_c_minus(p, c_minus);
      std::vector<double> values;
      symmetric_curve.push_back(curve_point(p, c_minus, {warm}, values));
      warm = values;
      symmetric_values.push_back(values);
    }
  }
  std::vector<CurvePoint> curve;
  {
    std::vector<double> warm;
    std::size_t i = 0;
    for (double c_minus : c_minus_grid) {
      OptimizationProblem p = proto;
      p.mode = AngleMode::FreeAngles;
      set_c_minus(p, c_minus);
      std::vector<std::vector<double>> starts{warm};
      const std::vector<double> seeded =
          expand_symmetric(symmetric_values[i], proto);
      if (!seeded.empty()) starts.push_back(seeded);
      std::vector<double> values;
      curve.push_back(curve_point(p, c_minus, starts, values));
      warm = values;
      ++i;
    }
  }
  curve.insert(curve.end(), symmetric_curve.begin(), symmetric_curve.end());
  return curve;
}

std::vector<CurvePoint> optimal_curve(Objective objective,
                                      std::span<const double> c_minus_grid,
                                      ThermalScenario scenario, double epsilon) {
  OptimizationProblem proto;
  proto.base =
      scenario_config(scenario, 1.0, 1.0, kTwoPi / 8.0, kTwoPi / 8.0, epsilon);
  proto.objective = objective;
  return optimal_curve(c_minus_grid, proto);
}

double loss_tolerance(const OptimizationProblem& proto, double e_threshold) {
  std::vector<double> warm;
  auto optimized_e = [&](double epsilon) {
    OptimizationProblem p = proto;
    p.mode = AngleMode::FreeAngles;
    p.base.channel.epsilon = epsilon;
    const OptResult r = minimize(p, {warm});
    warm = r.free_values;
    return r.e_opt;
  };
  const double eps_hi = 1.0 - 1e-6;
  if (optimized_e(0.0) >= e_threshold) return 0.0;
  if (optimized_e(eps_hi) < e_threshold) return 1.0;
  double lo = 0.0;
  double hi = eps_hi;
  for (int iter = 0; iter < 40; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (optimized_e(mid) < e_threshold) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double loss_tolerance(Objective objective, double c_minus, ThermalScenario scenario,
                      double e_threshold) {
  OptimizationProblem proto;
  proto.base = scenario_config(scenario, c_minus, c_minus, kTwoPi / 8.0,
                               kTwoPi / 8.0, 0.0);
  proto.objective = objective;
  return loss_tolerance(proto, e_threshold);
}

std::vector<std::pair<double, double>> phi_sweep(const CascadeConfig& base,
                                                 Objective objective,
                                                 int grid_points) {
  std::vector<std::pair<double, double>> sweep;
  sweep.reserve(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    CascadeConfig c = base;
    c.channel.phi = -kPi / 2.0 + kPi * i / std::max(1, grid_points - 1);
    const Eigen::Matrix4d v = solve_lyapunov(build_drift_diffusion(c));
    const auto [e_pm, e_mp] = steering_from_covariance(v);
    sweep.emplace_back(c.channel.phi,
                       objective == Objective::EPlusGivenMinus ? e_pm : e_mp);
  }
  return sweep;
}

}  // namespace steerlab
