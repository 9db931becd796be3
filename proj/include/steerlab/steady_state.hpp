#pragma once

#include <Eigen/Core>

#include "steerlab/model.hpp"

namespace steerlab {

// Second moments of the joint Gaussian steady state in the rotating-wave
// regime. Dimensionless quadrature units; X and P statistics coincide per
// oscillator and the X/X and P/P cross covariances are opposite.
struct SteadyStateMoments {
  double var_xm = 0.0;  // (dX-)^2
  double var_pm = 0.0;  // (dP-)^2
  double var_xp = 0.0;  // (dX+)^2
  double var_pp = 0.0;  // (dP+)^2
  double cov_xx = 0.0;  // <X+, X->
  double cov_pp = 0.0;  // <P+, P->
  double bare_var_p = 0.0;  // downstream variance with the interference term removed
};

// Variance an oscillator would have with the correlation channel absent:
// (Gamma/2 + gamma_tilde0) / gamma. Also the upstream oscillator's variance.
double bare_variance(const OscillatorParams& p);

// Closed-form steady-state moments. Requires phi = 0 (no closed form exists
// otherwise; use the dynamics oracle for phi != 0). Evaluation order is fixed
// (var_xm, then cov_xx, then var_xp) so results are bit-reproducible.
SteadyStateMoments rwa_moments(const CascadeConfig& c);

// Joint covariance in basis (X-, P-, X+, P+); X/P cross terms are zero.
Eigen::Matrix4d covariance_matrix(const SteadyStateMoments& m);

SteadyStateMoments moments_from_covariance(const Eigen::Matrix4d& v);

// Heisenberg condition V + (i/2)*sigma >= 0, tested through the real
// embedding [[V, -sigma/2], [sigma/2, V]] >= -tol.
bool heisenberg_satisfied(const Eigen::Matrix4d& v, double tol = 1e-9);

}  // namespace steerlab
