#include "steerlab/conditional.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "steerlab/linalg.hpp"

namespace steerlab {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Output quadratures of the two sideband modes after both interactions:
// rows X_u, P_u, X_l, P_l against the state (coupling) and the noise
// channels (reflected inputs). Derived from the same input-output relations
// that produce the cascade drift term.
void build_output_rows(const CascadeConfig& c,
                       Eigen::Matrix<double, 4, 4>& coupling,
                       Eigen::Matrix<double, 4, kNoiseChannelCount>& noise) {
  const DerivedRates rm = derived_rates(c.first);
  const DerivedRates rp = derived_rates(c.second);
  const double root_trans = std::sqrt(1.0 - c.channel.epsilon);
  const double root_loss = std::sqrt(c.channel.epsilon);
  const double cph = std::cos(c.channel.phi);
  const double sph = std::sin(c.channel.phi);
  const double mu = root_trans * std::sqrt(rm.gamma_P);  // upstream P-type imprint
  const double mb = root_trans * std::sqrt(rm.gamma_B);  // upstream B-type imprint
  const double pb = std::sqrt(rp.gamma_B);
  const double pp = std::sqrt(rp.gamma_P);

  coupling.setZero();
  noise.setZero();
  // X_u,out = r1*X'_bu + re*X_b'u + mu*(-s X- + c P-) - pb*P+
  coupling(0, 0) = -mu * sph;
  coupling(0, 1) = mu * cph;
  coupling(0, 3) = -pb;
  noise(0, kNoiseXbu) = root_trans * cph * kInvSqrt2;
  noise(0, kNoisePbu) = -root_trans * sph * kInvSqrt2;
  noise(0, kNoiseXbpu) = root_loss * kInvSqrt2;
  // P_u,out = r1*P'_bu + re*P_b'u + mu*(c X- + s P-) + pb*X+
  coupling(1, 0) = mu * cph;
  coupling(1, 1) = mu * sph;
  coupling(1, 2) = pb;
  noise(1, kNoiseXbu) = root_trans * sph * kInvSqrt2;
  noise(1, kNoisePbu) = root_trans * cph * kInvSqrt2;
  noise(1, kNoisePbpu) = root_loss * kInvSqrt2;
  // X_l,out = r1*X'_bl + re*X_b'l - mb*(s X- + c P-) + pp*P+
  coupling(2, 0) = -mb * sph;
  coupling(2, 1) = -mb * cph;
  coupling(2, 3) = pp;
  noise(2, kNoiseXbl) = root_trans * cph * kInvSqrt2;
  noise(2, kNoisePbl) = -root_trans * sph * kInvSqrt2;
  noise(2, kNoiseXbpl) = root_loss * kInvSqrt2;
  // P_l,out = r1*P'_bl + re*P_b'l + mb*(c X- - s P-) + pp*X+
  coupling(3, 0) = mb * cph;
  coupling(3, 1) = -mb * sph;
  coupling(3, 2) = pp;
  noise(3, kNoiseXbl) = root_trans * sph * kInvSqrt2;
  noise(3, kNoisePbl) = root_trans * cph * kInvSqrt2;
  noise(3, kNoiseXbpl) = root_loss * kInvSqrt2;
}

}  // namespace

OutputModel input_output_model(const CascadeConfig& c, const MeasurementModel& m) {
  require_valid(c);
  if (m.efficiency < 0.0 || m.efficiency > 1.0) {
    throw InvalidParameter("detection efficiency must lie in [0, 1]");
  }
  if (m.lo_angles.empty()) {
    throw InvalidParameter("measurement model needs at least one LO angle");
  }
  OutputModel out;
  build_output_rows(c, out.out_quadratures, out.out_noise);

  const DriftDiffusion dd = build_drift_diffusion(c);
  const int rails = static_cast<int>(m.lo_angles.size());
  const int streams = 2 * rails;
  const double weight = std::sqrt(m.efficiency / rails);

  // Demodulated commuting pair per rail:
  //   M_c = cos(a)(X_u + X_l) + sin(a)(P_u + P_l)
  //   M_s = cos(a)(P_u - P_l) + sin(a)(X_l - X_u)
  // Each stream has unit vacuum floor; splitter and detector vacua restore
  // the identity noise covariance and cancel cross-rail correlations, so the
  // streams' normalized model is dy = C x dt + G dW with G G^T = I.
  Eigen::MatrixXd cm(streams, 4);
  Eigen::MatrixXd fm(streams, kNoiseChannelCount);
  for (int r = 0; r < rails; ++r) {
    const double ca = std::cos(m.lo_angles[r]);
    const double sa = std::sin(m.lo_angles[r]);
    cm.row(2 * r) = ca * (out.out_quadratures.row(0) + out.out_quadratures.row(2)) +
                    sa * (out.out_quadratures.row(1) + out.out_quadratures.row(3));
    fm.row(2 * r) = ca * (out.out_noise.row(0) + out.out_noise.row(2)) +
                    sa * (out.out_noise.row(1) + out.out_noise.row(3));
    cm.row(2 * r + 1) =
        ca * (out.out_quadratures.row(1) - out.out_quadratures.row(3)) +
        sa * (out.out_quadratures.row(2) - out.out_quadratures.row(0));
    fm.row(2 * r + 1) = ca * (out.out_noise.row(1) - out.out_noise.row(3)) +
                        sa * (out.out_noise.row(2) - out.out_noise.row(0));
  }
  out.c_streams = weight * cm;
  out.g_streams = weight * fm;  // dW-facing part; vacuum completion implied
  out.noise_cross = dd.noise_coeffs * out.g_streams.transpose();
  return out;
}

namespace {

Eigen::Matrix4d filter_care(const Eigen::Matrix4d& a, const Eigen::Matrix4d& d,
                            const Eigen::MatrixXd& c, const Eigen::MatrixXd& n) {
  // Filter Riccati with unit measurement covariance:
  //   A V + V A^T + D - (V C^T + N)(C V + N^T) = 0
  // reduced to Abar V + V Abar^T + Dbar - V C^T C V = 0 with
  // Abar = A - N C, Dbar = D - N N^T. Kleinman-Newton from K0 = -N keeps the
  // closed loop at the (Hurwitz) unconditional drift.
  const Eigen::Matrix4d abar = a - n * c;
  const Eigen::Matrix4d dbar = linalg::symmetrize(d - n * n.transpose());
  const double scale = std::max(d.norm(), 1e-300);

  Eigen::MatrixXd gain = -n;
  Eigen::Matrix4d v = Eigen::Matrix4d::Zero();
  for (int iter = 0; iter < 60; ++iter) {
    const Eigen::Matrix4d closed = abar - gain * c;
    const Eigen::Matrix4d forcing =
        linalg::symmetrize(dbar + gain * gain.transpose());
    v = linalg::solve_lyapunov_generic(closed, forcing);
    gain = v * c.transpose();
    const double residual =
        (abar * v + v * abar.transpose() + dbar - v * c.transpose() * c * v)
            .norm();
    if (residual <= 1e-10 * scale) {
      const double min_eig = linalg::min_eigenvalue(v);
      if (min_eig < -1e-10 * std::max(v.norm(), 1.0)) {
        throw RiccatiNoPSDSolution("Riccati iterate lost positive semidefiniteness");
      }
      return linalg::symmetrize(v);
    }
  }
  throw RiccatiNoPSDSolution("Riccati iteration did not reach the residual bound");
}

double guarded_ratio_improvement(double e_uncond, double e_cond) {
  if (e_uncond <= 0.0) return 0.0;
  double d = (e_uncond - e_cond) / e_uncond;
  if (d < 0.0) {
    if (d < -1e-7) {
      std::ostringstream msg;
      msg << "conditioning increased a steering parameter: d = " << d;
      throw InternalConsistency(msg.str());
    }
    d = 0.0;
  }
  return d;
}

}  // namespace

std::pair<double, double> steering_from_covariance(const Eigen::Matrix4d& v) {
  if (v(0, 0) <= 0.0 || v(1, 1) <= 0.0 || v(2, 2) <= 0.0 || v(3, 3) <= 0.0) {
    throw DegenerateVariance("steering from covariance: zero variance");
  }
  const double ex_pm = v(2, 2) - v(0, 2) * v(0, 2) / v(0, 0);
  const double ep_pm = v(3, 3) - v(1, 3) * v(1, 3) / v(1, 1);
  const double ex_mp = v(0, 0) - v(0, 2) * v(0, 2) / v(2, 2);
  const double ep_mp = v(1, 1) - v(1, 3) * v(1, 3) / v(3, 3);
  return {std::sqrt(std::max(0.0, ex_pm) * std::max(0.0, ep_pm)),
          std::sqrt(std::max(0.0, ex_mp) * std::max(0.0, ep_mp))};
}

Eigen::Matrix4d solve_conditional_covariance(const CascadeConfig& c,
                                             const MeasurementModel& m) {
  const DriftDiffusion dd = build_drift_diffusion(c);
  if (m.efficiency == 0.0) {
    return solve_lyapunov(dd);  // no record, conditional = unconditional
  }
  const OutputModel out = input_output_model(c, m);
  return filter_care(dd.a_matrix, dd.d_matrix, out.c_streams, out.noise_cross);
}

ConditionalResult solve_conditional(const CascadeConfig& c,
                                    const MeasurementModel& m) {
  const DriftDiffusion dd = build_drift_diffusion(c);
  ConditionalResult result;
  result.v_unconditional = solve_lyapunov(dd);
  result.v_conditional = solve_conditional_covariance(c, m);
  result.ordering_min_eig =
      linalg::min_eigenvalue(result.v_unconditional - result.v_conditional);
  const double order_tol = 1e-9 * std::max(result.v_unconditional.norm(), 1.0);
  if (result.ordering_min_eig < -order_tol) {
    throw InternalConsistency(
        "conditional covariance is not dominated by the unconditional one");
  }
  std::tie(result.e_pm_uncond, result.e_mp_uncond) =
      steering_from_covariance(result.v_unconditional);
  std::tie(result.e_pm_cond, result.e_mp_cond) =
      steering_from_covariance(result.v_conditional);
  result.d_pm = guarded_ratio_improvement(result.e_pm_uncond, result.e_pm_cond);
  result.d_mp = guarded_ratio_improvement(result.e_mp_uncond, result.e_mp_cond);
  return result;
}

std::pair<double, double> best_improvement_over_angles(const CascadeConfig& c,
                                                       int grid_points) {
  double best_pm = 0.0;
  double best_mp = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    MeasurementModel m;
    m.lo_angles = {i * kTwoPi / 2.0 / grid_points};  // [0, pi)
    m.efficiency = 1.0;
    const ConditionalResult r = solve_conditional(c, m);
    best_pm = std::max(best_pm, r.d_pm);
    best_mp = std::max(best_mp, r.d_mp);
  }
  return {best_pm, best_mp};
}

}  // namespace steerlab
