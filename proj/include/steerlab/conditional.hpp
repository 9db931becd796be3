#pragma once

#include <Eigen/Core>
#include <vector>

#include "steerlab/dynamics_oracle.hpp"

namespace steerlab {

// Continuous monitoring of the joint output beam. A homodyne record at local
// oscillator angle alpha demodulates into two commuting sideband
// combinations; with several angles the beam is split evenly across rails
// (each rail admixes the splitter vacuum). Efficiency multiplies every rail.
struct MeasurementModel {
  // Default: the phase quadrature of the joint output. At this angle the
  // record duplicates what the downstream oscillator has already absorbed,
  // so conditioning adds almost nothing; other angles extract more.
  std::vector<double> lo_angles = {1.5707963267948966};
  double efficiency = 1.0;
};

// Linear measurement model dy = C x dt + G dW for the monitored streams,
// normalized so that the stream noise covariance is the identity. The raw
// output-quadrature rows (X_u, P_u, X_l, P_l of the two output sidebands) are
// kept for tests and diagnostics.
struct OutputModel {
  Eigen::Matrix<double, 4, 4> out_quadratures;  // rows: state coupling
  Eigen::Matrix<double, 4, kNoiseChannelCount> out_noise;
  Eigen::MatrixXd c_streams;   // (2*rails) x 4
  Eigen::MatrixXd g_streams;   // (2*rails) x channels, G G^T = I
  Eigen::MatrixXd noise_cross;  // N = E G^T, 4 x (2*rails)
};

OutputModel input_output_model(const CascadeConfig& c, const MeasurementModel& m);

struct ConditionalResult {
  Eigen::Matrix4d v_unconditional = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d v_conditional = Eigen::Matrix4d::Zero();
  double e_pm_uncond = 0.0;
  double e_mp_uncond = 0.0;
  double e_pm_cond = 0.0;
  double e_mp_cond = 0.0;
  double d_pm = 0.0;  // (E_u - E_c)/E_u for E+|-
  double d_mp = 0.0;
  // Smallest eigenvalue of V_u - V_c; nonnegative up to solver tolerance.
  double ordering_min_eig = 0.0;
};

// Steady-state conditional covariance from the filter Riccati equation
// (Kleinman-Newton, seeded by the Hurwitz drift), residual <= 1e-10*|D|.
Eigen::Matrix4d solve_conditional_covariance(const CascadeConfig& c,
                                             const MeasurementModel& m);

ConditionalResult solve_conditional(const CascadeConfig& c,
                                    const MeasurementModel& m = {});

// Reid parameters evaluated on an arbitrary covariance via the
// uncertainty-product form (reduces to the variance form under the
// rotating-wave symmetries). Returns {E+|-, E-|+}.
std::pair<double, double> steering_from_covariance(const Eigen::Matrix4d& v);

// Largest improvement d for each direction over a grid of single-homodyne
// LO angles at full efficiency. Diagnostic; the paper-level claim concerns
// the default model, not this upper bound.
std::pair<double, double> best_improvement_over_angles(const CascadeConfig& c,
                                                       int grid_points = 24);

}  // namespace steerlab
