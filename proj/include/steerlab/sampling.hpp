#pragma once

#include <random>

#include "steerlab/model.hpp"

namespace steerlab {

// How random configurations are drawn for oracle batches and property
// sweeps: cooperativities log-uniform, angles uniform over [0, pi/2],
// intrinsic linewidths log-uniform (Hz), occupations zero or log-uniform.
struct SampleOptions {
  double c_min = 0.1;
  double c_max = 1e3;
  double gamma0_hz_min = 0.01;
  double gamma0_hz_max = 1e3;
  double nbar_max = 1e6;
  double vacuum_bath_probability = 0.25;
  bool random_epsilon = true;
  bool random_phi = false;
  int max_attempts = 100000;
};

// Draws until the stability condition holds.
CascadeConfig sample_stable_config(std::mt19937_64& rng,
                                   const SampleOptions& opt = {});

}  // namespace steerlab
