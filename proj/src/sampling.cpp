#include "steerlab/sampling.hpp"

#include <cmath>

namespace steerlab {

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

OscillatorParams sample_oscillator(std::mt19937_64& rng, const SampleOptions& opt) {
  std::uniform_real_distribution<double> angle(0.0, kTwoPi / 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double gamma0 = kTwoPi * log_uniform(rng, opt.gamma0_hz_min, opt.gamma0_hz_max);
  const double nbar = unit(rng) < opt.vacuum_bath_probability
                          ? 0.0
                          : log_uniform(rng, 1e-2, opt.nbar_max);
  const double cooperativity = log_uniform(rng, opt.c_min, opt.c_max);
  return OscillatorParams::from_cooperativity(cooperativity, angle(rng), gamma0,
                                              nbar);
}

}  // namespace

CascadeConfig sample_stable_config(std::mt19937_64& rng, const SampleOptions& opt) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    CascadeConfig c;
    c.first = sample_oscillator(rng, opt);
    c.second = sample_oscillator(rng, opt);
    c.channel.epsilon = opt.random_epsilon ? unit(rng) : 0.0;
    c.channel.phi = opt.random_phi ? kTwoPi * (unit(rng) - 0.5) / 2.0 : 0.0;
    if (derived_rates(c.first).gamma_total > 0.0 &&
        derived_rates(c.second).gamma_total > 0.0) {
      return c;
    }
  }
  throw EmptyFeasibleSet("no stable configuration found while sampling");
}

}  // namespace steerlab
