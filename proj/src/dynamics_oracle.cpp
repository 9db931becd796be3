#include "steerlab/dynamics_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "steerlab/linalg.hpp"

namespace steerlab {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double max_drift_eigenvalue_magnitude(const Eigen::Matrix4d& a) {
  const Eigen::Vector4cd eigs = a.eigenvalues();
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(eigs(i)));
  return m;
}

}  // namespace

DriftDiffusion build_drift_diffusion(const CascadeConfig& c) {
  require_valid(c);
  const DerivedRates rm = derived_rates(c.first);
  const DerivedRates rp = derived_rates(c.second);
  const double gm = rm.gamma_total;
  const double gp = rp.gamma_total;
  const double root_trans = std::sqrt(1.0 - c.channel.epsilon);
  const double root_loss = std::sqrt(c.channel.epsilon);
  const double coupling_r =
      std::sqrt(rm.gamma_B * rp.gamma_P) - std::sqrt(rp.gamma_B * rm.gamma_P);
  const double coupling_s =
      std::sqrt(rm.gamma_B * rp.gamma_P) + std::sqrt(rp.gamma_B * rm.gamma_P);
  const double cph = std::cos(c.channel.phi);
  const double sph = std::sin(c.channel.phi);

  DriftDiffusion dd;
  Eigen::Matrix4d& a = dd.a_matrix;
  a(0, 0) = a(1, 1) = -gm / 2.0;
  a(2, 2) = a(3, 3) = -gp / 2.0;
  // Cascade block from eliminating the channel: the phase mixes the
  // directional rate R with the sum rate S = sqrt(G+ G-) sin(th+ + th-).
  a(2, 0) = root_trans * coupling_r * cph;
  a(2, 1) = -root_trans * coupling_s * sph;
  a(3, 0) = -root_trans * coupling_s * sph;
  a(3, 1) = -root_trans * coupling_r * cph;

  // Noise coefficients, one column per channel (standardized Wiener). The
  // downstream couples to the phase-rotated common sidebands; the rotation
  // acts on (X, P) of each sideband as X' = c X - s P, P' = s X + c P.
  auto& e = dd.noise_coeffs;
  const double sqrt_gbm = std::sqrt(rm.gamma_B);
  const double sqrt_gpm = std::sqrt(rm.gamma_P);
  const double sqrt_gbp = std::sqrt(rp.gamma_B);
  const double sqrt_gpp = std::sqrt(rp.gamma_P);
  const double th_m = std::sqrt(rm.gamma_tilde0);
  const double th_p = std::sqrt(rp.gamma_tilde0);

  // dX-/dt noise: -sqrt(G-B) P_bl + sqrt(G-P) P_bu + sqrt(g-0) X_th-
  e(0, kNoisePbl) = -sqrt_gbm * kInvSqrt2;
  e(0, kNoisePbu) = sqrt_gpm * kInvSqrt2;
  e(0, kNoiseXthMinus) = th_m;
  // dP-/dt noise: sqrt(G-B) X_bl + sqrt(G-P) X_bu + sqrt(g-0) P_th-
  e(1, kNoiseXbl) = sqrt_gbm * kInvSqrt2;
  e(1, kNoiseXbu) = sqrt_gpm * kInvSqrt2;
  e(1, kNoisePthMinus) = th_m;
  // dX+/dt noise: sqrt(1-eps)(-sqrt(G+B) P'_bu + sqrt(G+P) P'_bl)
  //             + sqrt(eps)(-sqrt(G+B) P_b'u + sqrt(G+P) P_b'l) + thermal
  e(2, kNoiseXbu) = -root_trans * sqrt_gbp * sph * kInvSqrt2;
  e(2, kNoisePbu) = -root_trans * sqrt_gbp * cph * kInvSqrt2;
  e(2, kNoiseXbl) = root_trans * sqrt_gpp * sph * kInvSqrt2;
  e(2, kNoisePbl) = root_trans * sqrt_gpp * cph * kInvSqrt2;
  e(2, kNoisePbpu) = -root_loss * sqrt_gbp * kInvSqrt2;
  e(2, kNoisePbpl) = root_loss * sqrt_gpp * kInvSqrt2;
  e(2, kNoiseXthPlus) = th_p;
  // dP+/dt noise: sqrt(1-eps)(sqrt(G+B) X'_bu + sqrt(G+P) X'_bl)
  //             + sqrt(eps)(sqrt(G+B) X_b'u + sqrt(G+P) X_b'l) + thermal
  e(3, kNoiseXbu) = root_trans * sqrt_gbp * cph * kInvSqrt2;
  e(3, kNoisePbu) = -root_trans * sqrt_gbp * sph * kInvSqrt2;
  e(3, kNoiseXbl) = root_trans * sqrt_gpp * cph * kInvSqrt2;
  e(3, kNoisePbl) = -root_trans * sqrt_gpp * sph * kInvSqrt2;
  e(3, kNoiseXbpu) = root_loss * sqrt_gbp * kInvSqrt2;
  e(3, kNoiseXbpl) = root_loss * sqrt_gpp * kInvSqrt2;
  e(3, kNoisePthPlus) = th_p;

  dd.d_matrix = e * e.transpose();

  if (!linalg::is_hurwitz(dd.a_matrix)) {
    throw UnstableConfig("drift matrix has an eigenvalue with Re >= 0");
  }
  const double d_scale = dd.d_matrix.norm();
  if (d_scale > 0.0 &&
      linalg::min_eigenvalue(dd.d_matrix) < -1e-12 * d_scale) {
    throw InternalConsistency("diffusion matrix is not positive semidefinite");
  }
  return dd;
}

Eigen::Matrix4d solve_lyapunov(const DriftDiffusion& dd) {
  const Eigen::Matrix4d& a = dd.a_matrix;
  const Eigen::Matrix4d& d = dd.d_matrix;
  if (!linalg::is_hurwitz(a)) {
    throw NotHurwitz("Lyapunov solve requires a Hurwitz drift");
  }
  Eigen::Matrix4d v;
  if (a.topRightCorner<2, 2>().isZero(0.0)) {
    // Block back-substitution along the cascade direction. The upstream
    // block never touches downstream inputs.
    const Eigen::MatrixXd a11 = a.topLeftCorner<2, 2>();
    const Eigen::MatrixXd a21 = a.bottomLeftCorner<2, 2>();
    const Eigen::MatrixXd a22 = a.bottomRightCorner<2, 2>();
    const Eigen::MatrixXd v11 =
        linalg::solve_lyapunov_generic(a11, d.topLeftCorner<2, 2>());
    const Eigen::MatrixXd v21 = linalg::solve_sylvester(
        a22, a11.transpose(),
        Eigen::MatrixXd(d.bottomLeftCorner<2, 2>() + a21 * v11));
    const Eigen::MatrixXd v22 = linalg::solve_lyapunov_generic(
        a22, Eigen::MatrixXd(d.bottomRightCorner<2, 2>() + a21 * v21.transpose() +
                             v21 * a21.transpose()));
    v.topLeftCorner<2, 2>() = v11;
    v.bottomLeftCorner<2, 2>() = v21;
    v.topRightCorner<2, 2>() = v21.transpose();
    v.bottomRightCorner<2, 2>() = v22;
  } else {
    v = linalg::solve_lyapunov_generic(a, d);
  }
  const double residual = (a * v + v * a.transpose() + d).norm();
  if (residual > 1e-10 * std::max(d.norm(), 1e-300)) {
    std::ostringstream msg;
    msg << "Lyapunov residual " << residual << " exceeds 1e-10*|D|";
    throw SolverSingular(msg.str());
  }
  return v;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct TrajectoryStats {
  Eigen::Matrix4d second_moment = Eigen::Matrix4d::Zero();
};

TrajectoryStats run_trajectory(const DriftDiffusion& dd, double dt, long n_steps,
                               long burn_in_steps, std::uint64_t seed,
                               const std::string& dump_path) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_dt = std::sqrt(dt);
  const Eigen::Matrix4d& a = dd.a_matrix;
  const auto& e = dd.noise_coeffs;

  std::ofstream dump;
  if (!dump_path.empty()) {
    dump.open(dump_path);
    dump << "t,xm,pm,xp,pp\n";
  }

  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  Eigen::Matrix<double, kNoiseChannelCount, 1> dw;
  long samples = 0;
  for (long step = 0; step < n_steps; ++step) {
    for (int ch = 0; ch < kNoiseChannelCount; ++ch) {
      dw(ch) = normal(rng) * sqrt_dt;
    }
    x = x + a * x * dt + e * dw;
    if (step >= burn_in_steps) {
      acc.noalias() += x * x.transpose();
      ++samples;
    }
    if (dump.is_open()) {
      dump << (step + 1) * dt << ',' << x(0) << ',' << x(1) << ',' << x(2) << ','
           << x(3) << '\n';
    }
  }
  TrajectoryStats stats;
  if (samples > 0) stats.second_moment = acc / static_cast<double>(samples);
  return stats;
}

}  // namespace

SimulationResult simulate_sde(const CascadeConfig& c, const SimulationSpec& s) {
  const DriftDiffusion dd = build_drift_diffusion(c);
  const DerivedRates rm = derived_rates(c.first);
  const DerivedRates rp = derived_rates(c.second);
  const double gamma_min = std::min(rm.gamma_total, rp.gamma_total);
  const double rate_max = std::max({rm.gamma_total, rp.gamma_total, c.first.gamma,
                                    c.second.gamma});

  SimulationSpec spec = s;
  if (spec.dt <= 0.0) spec.dt = 0.01 / rate_max;
  if (spec.t_end <= 0.0) spec.t_end = 50.0 / gamma_min;
  if (spec.n_traj < 1) {
    throw InvalidParameter("n_traj must be >= 1");
  }
  if (spec.burn_in_fraction < 0.0 || spec.burn_in_fraction >= 1.0) {
    throw InvalidParameter("burn_in_fraction must be in [0, 1)");
  }
  if (spec.dt * max_drift_eigenvalue_magnitude(dd.a_matrix) >= 0.1) {
    throw StiffStep("dt * max|eig(A)| >= 0.1; decrease dt");
  }

  const long n_steps = static_cast<long>(std::ceil(spec.t_end / spec.dt));
  const long burn_in_steps =
      static_cast<long>(std::floor(n_steps * spec.burn_in_fraction));
  if (n_steps <= burn_in_steps) {
    throw InvalidParameter("t_end leaves no samples after burn-in");
  }

  std::vector<TrajectoryStats> stats(spec.n_traj);
  const int n_threads = std::max(1, std::min(spec.threads, spec.n_traj));
  auto worker = [&](int begin, int end) {
    for (int k = begin; k < end; ++k) {
      const std::uint64_t traj_seed =
          splitmix64(spec.seed ^ (0x9e3779b97f4a7c15ull * (k + 1)));
      std::string dump_path;
      if (!spec.dump_prefix.empty()) {
        dump_path = spec.dump_prefix + std::to_string(k) + ".csv";
      }
      stats[k] = run_trajectory(dd, spec.dt, n_steps, burn_in_steps, traj_seed,
                                dump_path);
    }
  };
  if (n_threads == 1) {
    worker(0, spec.n_traj);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (spec.n_traj + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(spec.n_traj, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  Eigen::Matrix4d mean = Eigen::Matrix4d::Zero();
  for (const auto& st : stats) mean += st.second_moment;
  mean /= static_cast<double>(spec.n_traj);

  // Jackknife over trajectories: leave-one-out means of the per-trajectory
  // time averages.
  Eigen::Matrix4d se = Eigen::Matrix4d::Zero();
  if (spec.n_traj > 1) {
    const double n = static_cast<double>(spec.n_traj);
    Eigen::Matrix4d sum_sq = Eigen::Matrix4d::Zero();
    for (const auto& st : stats) {
      const Eigen::Matrix4d loo = (mean * n - st.second_moment) / (n - 1.0);
      sum_sq += (loo - mean).cwiseProduct(loo - mean);
    }
    se = ((n - 1.0) / n * sum_sq).cwiseSqrt();
  }

  SimulationResult result;
  result.covariance = mean;
  result.std_error = se;
  result.dt = spec.dt;
  result.t_end = spec.t_end;
  result.n_traj = spec.n_traj;
  result.seed = spec.seed;
  return result;
}

}  // namespace steerlab
