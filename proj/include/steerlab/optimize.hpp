#pragma once

#include <span>
#include <vector>

#include "steerlab/steering.hpp"

namespace steerlab {

enum class Objective { EPlusGivenMinus, EMinusGivenPlus };

// FreeAngles lets theta+ and theta- move independently (f != 0 allowed);
// SymmetricAngles forces theta+ = theta- (the f = 0 baseline).
enum class AngleMode { FreeAngles, SymmetricAngles };

struct ParamBounds {
  double lo = 0.0;
  double hi = 0.0;
};

// Constrained minimization of one steering parameter over a box of free
// parameters, everything else taken from `base`. The downstream coupling is
// parametrized by C+ (log scale) when the downstream thermal decoherence rate
// is nonzero, by Gamma+ (rad/s, log scale) otherwise.
struct OptimizationProblem {
  CascadeConfig base;
  Objective objective = Objective::EPlusGivenMinus;
  AngleMode mode = AngleMode::FreeAngles;

  bool free_c_plus = true;
  // lo <= 0 or hi <= 0 selects the defaults max(1e-3, 1e-4*C-) and 1e4*C-.
  ParamBounds c_plus_bounds{0.0, 0.0};
  // Free upstream coupling, for order-swapped and mirrored problems.
  bool free_c_minus = false;
  ParamBounds c_minus_bounds{0.0, 0.0};
  bool free_theta_plus = true;
  ParamBounds theta_plus_bounds{0.0, kTwoPi / 4.0};
  bool free_theta_minus = true;
  ParamBounds theta_minus_bounds{0.0, kTwoPi / 4.0};
  bool free_phi = false;
  ParamBounds phi_bounds{-kTwoPi / 2.0, kTwoPi / 2.0};

  // Feasibility: gamma_j >= margin_rel * max(Gamma_j, gamma_j0) per oscillator.
  double stability_margin_rel = 1e-6;

  int cooperativity_points_per_decade = 32;
  int angle_points = 33;
  int refine_rounds = 3;
  int refine_points = 13;
  double polish_tol = 1e-8;  // simplex spread tolerance on E
};

struct OptResult {
  CascadeConfig optimum;
  double e_opt = 0.0;
  SteeringClass classification = SteeringClass::NoSteering;
  long evaluations = 0;
  bool converged = false;
  bool on_bound = false;  // any free coordinate pinned at its box edge
  // Final free coordinates in dimension order (log10 C-, log10 C+, theta-
  // or common theta, theta+, phi; absent dimensions skipped). Usable as a
  // warm start for a neighboring problem.
  std::vector<double> free_values;
  // Best objective after each stage (coarse grid, refinements, polish);
  // non-increasing by construction.
  std::vector<double> trace;
};

OptResult minimize(const OptimizationProblem& p);

// Same, polishing additionally from caller-provided starts (warm starts from
// neighboring grid points or related problems). Coordinates follow the
// free-dimension order documented on OptResult::free_values; starts of the
// wrong length are ignored.
OptResult minimize(const OptimizationProblem& p,
                   const std::vector<std::vector<double>>& warm_starts);

// The two thermal parameter sets used throughout the sweeps: both baths hot,
// or a hot client with a vacuum-bath server of matched decoherence rate.
enum class ThermalScenario { HotHot, HotVacuum };

CascadeConfig scenario_config(ThermalScenario s, double c_minus, double c_plus,
                              double theta_minus, double theta_plus,
                              double epsilon, double phi = 0.0);

struct CurvePoint {
  double c_minus = 0.0;
  double e_opt = 0.0;
  double theta_minus = 0.0;
  double theta_plus = 0.0;
  double c_plus_ratio = 0.0;  // C+* / C-
  AngleMode mode = AngleMode::FreeAngles;
  SteeringClass classification = SteeringClass::NoSteering;
  bool on_bound = false;
  bool converged = false;
};

// One constrained minimization per grid point (the proto problem with C-
// replaced), warm-started from the previous point, emitted for both angle
// modes. Requires a nonzero upstream thermal decoherence rate so that C-
// determines the coupling.
std::vector<CurvePoint> optimal_curve(std::span<const double> c_minus_grid,
                                      const OptimizationProblem& proto);
std::vector<CurvePoint> optimal_curve(Objective objective,
                                      std::span<const double> c_minus_grid,
                                      ThermalScenario scenario, double epsilon);

// Largest epsilon with optimized E below the threshold (re-optimizing all
// free parameters at each epsilon); 1.0 when the threshold is never crossed.
double loss_tolerance(const OptimizationProblem& proto, double e_threshold = 0.5);
double loss_tolerance(Objective objective, double c_minus,
                      ThermalScenario scenario, double e_threshold = 0.5);

// Objective evaluated through the dynamics oracle on a phi grid; confirms
// the zero-phase choice at a given configuration.
std::vector<std::pair<double, double>> phi_sweep(const CascadeConfig& base,
                                                 Objective objective,
                                                 int grid_points = 25);

}  // namespace steerlab
