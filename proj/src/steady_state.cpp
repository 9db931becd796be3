#include "steerlab/steady_state.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace steerlab {

double bare_variance(const OscillatorParams& p) {
  const DerivedRates r = derived_rates(p);
  if (r.gamma_total <= 0.0) {
    throw UnstableConfig("bare variance undefined: total damping <= 0");
  }
  return (p.gamma / 2.0 + r.gamma_tilde0) / r.gamma_total;
}

SteadyStateMoments rwa_moments(const CascadeConfig& c) {
  require_valid(c);
  if (c.channel.phi != 0.0) {
    throw PhaseUnsupported(
        "closed-form moments require phi = 0; use the dynamics oracle for "
        "rotated channels");
  }
  const DerivedRates rm = derived_rates(c.first);
  const DerivedRates rp = derived_rates(c.second);
  const double root_trans = std::sqrt(1.0 - c.channel.epsilon);
  const double coupling_geom = std::sqrt(c.first.gamma * c.second.gamma);
  const double r = directional_coupling(c).rate;

  SteadyStateMoments m;
  m.var_xm = (c.first.gamma / 2.0 + rm.gamma_tilde0) / rm.gamma_total;
  m.var_pm = m.var_xm;
  m.cov_xx = -root_trans *
             (coupling_geom * std::sin(c.second.theta + c.first.theta) -
              2.0 * r * m.var_xm) /
             (rp.gamma_total + rm.gamma_total);
  m.cov_pp = -m.cov_xx;
  m.bare_var_p = (c.second.gamma / 2.0 + rp.gamma_tilde0) / rp.gamma_total;
  m.var_xp = (c.second.gamma / 2.0 + rp.gamma_tilde0 +
              2.0 * root_trans * r * m.cov_xx) /
             rp.gamma_total;
  m.var_pp = m.var_xp;
  return m;
}

Eigen::Matrix4d covariance_matrix(const SteadyStateMoments& m) {
  Eigen::Matrix4d v = Eigen::Matrix4d::Zero();
  v(0, 0) = m.var_xm;
  v(1, 1) = m.var_pm;
  v(2, 2) = m.var_xp;
  v(3, 3) = m.var_pp;
  v(0, 2) = v(2, 0) = m.cov_xx;
  v(1, 3) = v(3, 1) = m.cov_pp;
  return v;
}

SteadyStateMoments moments_from_covariance(const Eigen::Matrix4d& v) {
  SteadyStateMoments m;
  m.var_xm = v(0, 0);
  m.var_pm = v(1, 1);
  m.var_xp = v(2, 2);
  m.var_pp = v(3, 3);
  m.cov_xx = v(0, 2);
  m.cov_pp = v(1, 3);
  m.bare_var_p = 0.0;  // not derivable from the covariance alone
  return m;
}

bool heisenberg_satisfied(const Eigen::Matrix4d& v, double tol) {
  Eigen::Matrix4d sigma = Eigen::Matrix4d::Zero();
  sigma(0, 1) = 1.0;
  sigma(1, 0) = -1.0;
  sigma(2, 3) = 1.0;
  sigma(3, 2) = -1.0;
  Eigen::Matrix<double, 8, 8> embed;
  embed << v, -0.5 * sigma, 0.5 * sigma, v;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(embed);
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace steerlab
