#include <cmath>
#include <random>

#include <doctest.h>

#include "steerlab/sampling.hpp"
#include "steerlab/steady_state.hpp"

using namespace steerlab;

namespace {

constexpr double kPi = kTwoPi / 2.0;

// Both baths hot, the workhorse parameter set of the contour maps.
CascadeConfig hot_config(double c_minus, double c_plus, double theta_minus,
                         double theta_plus, double epsilon = 0.0) {
  CascadeConfig c;
  c.first = OscillatorParams::from_cooperativity(c_minus, theta_minus,
                                                 kTwoPi * 0.1, 1e5);
  c.second = OscillatorParams::from_cooperativity(c_plus, theta_plus,
                                                  kTwoPi * 0.1, 1e5);
  c.channel.epsilon = epsilon;
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("steady_state");

TEST_CASE("full loss removes all cross correlations") {
  const SteadyStateMoments m = rwa_moments(hot_config(50, 50, 0.35 * kPi,
                                                      0.4 * kPi, 1.0));
  CHECK(m.cov_xx == 0.0);
  CHECK(m.cov_pp == 0.0);
  CHECK(m.var_xp == doctest::Approx(m.bare_var_p).epsilon(1e-15));
}

TEST_CASE("a decoupled upstream oscillator thermalizes") {
  CascadeConfig c = hot_config(50, 50, 0.35 * kPi, 0.35 * kPi);
  c.first.gamma = 0.0;
  const SteadyStateMoments m = rwa_moments(c);
  CHECK(m.cov_xx == 0.0);
  CHECK(m.var_xm == doctest::Approx(1e5 + 0.5).epsilon(1e-12));
}

TEST_CASE("bare variance limits") {
  SUBCASE("ground-state cooling in the resolved-sideband limit") {
    const OscillatorParams p =
        OscillatorParams::from_cooperativity(1e8, kPi / 2.0, kTwoPi * 0.1, 1e5);
    CHECK(bare_variance(p) == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("optical-broadening asymptote at theta = 0.35 pi") {
    const double asymptote = -1.0 / (2.0 * std::cos(0.7 * kPi));
    CHECK(asymptote == doctest::Approx(0.8506508083520399).epsilon(1e-12));
    const double at_c4 = bare_variance(OscillatorParams::from_cooperativity(
        1e4, 0.35 * kPi, kTwoPi * 0.1, 1e5));
    const double at_c6 = bare_variance(OscillatorParams::from_cooperativity(
        1e6, 0.35 * kPi, kTwoPi * 0.1, 1e5));
    CHECK(at_c4 == doctest::Approx(asymptote).epsilon(0.01));
    CHECK(std::abs(at_c6 - asymptote) < std::abs(at_c4 - asymptote));
  }
  SUBCASE("no coupling means thermal equilibrium") {
    OscillatorParams p;
    p.gamma0 = 1.0;
    p.nbar = 3.25;
    CHECK(bare_variance(p) == doctest::Approx(3.75).epsilon(1e-14));
  }
  SUBCASE("undamped oscillator has no steady state") {
    CHECK_THROWS_AS(bare_variance(OscillatorParams{}), UnstableConfig);
  }
}

TEST_CASE("closed form requires zero channel phase") {
  CascadeConfig c = hot_config(50, 50, 0.35 * kPi, 0.35 * kPi);
  c.channel.phi = 0.3;
  CHECK_THROWS_AS(rwa_moments(c), PhaseUnsupported);
}

TEST_CASE("unstable configurations are rejected") {
  CascadeConfig c = hot_config(50, 50, 0.35 * kPi, 0.35 * kPi);
  c.second.theta = 0.0;
  CHECK_THROWS_AS(rwa_moments(c), UnstableConfig);
}

TEST_CASE("decomposition identity and exact antisymmetry on random configs") {
  std::mt19937_64 rng(21);
  SampleOptions opt;
  for (int i = 0; i < 1500; ++i) {
    const CascadeConfig c = sample_stable_config(rng, opt);
    const SteadyStateMoments m = rwa_moments(c);
    const DirectionalCoupling dc = directional_coupling(c);
    const double reconstructed =
        m.bare_var_p + std::sqrt(1.0 - c.channel.epsilon) * dc.f * m.cov_xx;
    CHECK(std::abs(m.var_xp - reconstructed) <= 1e-12 * std::abs(m.var_xp));
    CHECK(m.cov_xx + m.cov_pp == 0.0);  // exact as computed
    CHECK(m.var_xm == m.var_pm);
    CHECK(m.var_xp == m.var_pp);
  }
}

TEST_CASE("cross covariance magnitude never grows with loss") {
  std::mt19937_64 rng(22);
  SampleOptions opt;
  opt.random_epsilon = false;
  for (int i = 0; i < 200; ++i) {
    CascadeConfig c = sample_stable_config(rng, opt);
    double previous = std::numeric_limits<double>::infinity();
    for (double eps : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      c.channel.epsilon = eps;
      const double magnitude = std::abs(rwa_moments(c).cov_xx);
      CHECK(magnitude <= previous * (1.0 + 1e-12));
      previous = magnitude;
    }
  }
}

TEST_CASE("joint covariance satisfies the Heisenberg bound") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 1200; ++i) {
    const CascadeConfig c = sample_stable_config(rng);
    const Eigen::Matrix4d v = covariance_matrix(rwa_moments(c));
    CHECK(heisenberg_satisfied(v, 1e-9 * std::max(1.0, v.norm())));
  }
}

TEST_SUITE_END();
