#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "steerlab/model.hpp"

namespace steerlab {

// Independent white-noise channels driving the quadrature Langevin system.
// b are the common optical vacuum sidebands (upper/lower), bp the extraneous
// vacuum admixed by the channel loss, th the two thermal reservoirs.
enum NoiseChannel : int {
  kNoiseXbu = 0,
  kNoisePbu,
  kNoiseXbl,
  kNoisePbl,
  kNoiseXbpu,
  kNoisePbpu,
  kNoiseXbpl,
  kNoisePbpl,
  kNoiseXthMinus,
  kNoisePthMinus,
  kNoiseXthPlus,
  kNoisePthPlus,
  kNoiseChannelCount,
};

// Linear model dx = A x dt + E dW in basis (X-, P-, X+, P+), with W a vector
// of independent standard Wiener processes over the channels above. The
// diffusion matrix is D = E E^T. Rates in rad/s.
struct DriftDiffusion {
  Eigen::Matrix4d a_matrix = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d d_matrix = Eigen::Matrix4d::Zero();
  Eigen::Matrix<double, 4, kNoiseChannelCount> noise_coeffs =
      Eigen::Matrix<double, 4, kNoiseChannelCount>::Zero();
};

// Builds the quadrature representation of the cascade Langevin equations,
// including the loss-weighted reuse of the upstream optical noise downstream
// and the channel phase. Throws UnstableConfig when the drift is not Hurwitz.
DriftDiffusion build_drift_diffusion(const CascadeConfig& c);

// Steady-state covariance from A V + V A^T + D = 0. For the cascade's
// block-lower-triangular drift the solve runs blockwise, so the upstream
// 2x2 block depends only on upstream inputs.
Eigen::Matrix4d solve_lyapunov(const DriftDiffusion& dd);

struct SimulationSpec {
  double dt = 0.0;     // integrator step [s]; 0 selects 0.01/max(gamma, Gamma)
  double t_end = 0.0;  // total time [s]; 0 selects 50/min(gamma)
  int n_traj = 64;
  std::uint64_t seed = 0x5eed1ab5u;
  double burn_in_fraction = 0.25;
  int threads = 1;
  // When non-empty, writes one CSV per trajectory ("<prefix><index>.csv",
  // header t,xm,pm,xp,pp). Every step is written; large runs produce large
  // files.
  std::string dump_prefix;
};

struct SimulationResult {
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d std_error = Eigen::Matrix4d::Zero();  // jackknife over trajectories
  double dt = 0.0;
  double t_end = 0.0;
  int n_traj = 0;
  std::uint64_t seed = 0;
};

// Euler-Maruyama integration of the cascade. The upstream optical noise
// increments are reused (scaled by sqrt(1-epsilon) and the channel phase) in
// the downstream update of the same step; the loss branch uses independent
// draws. Deterministic for fixed (seed, dt, t_end, n_traj) regardless of the
// thread count.
SimulationResult simulate_sde(const CascadeConfig& c, const SimulationSpec& s);

}  // namespace steerlab
