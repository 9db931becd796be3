#include <cmath>
#include <random>

#include <doctest.h>

#include "steerlab/model.hpp"

using namespace steerlab;

namespace {

constexpr double kPi = kTwoPi / 2.0;

OscillatorParams osc(double gamma, double theta, double gamma0 = 0.0,
                     double nbar = 0.0) {
  OscillatorParams p;
  p.gamma = gamma;
  p.theta = theta;
  p.gamma0 = gamma0;
  p.nbar = nbar;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("derived rates at the QND point split the coupling evenly") {
  const DerivedRates r = derived_rates(osc(1.0, kPi / 4.0, 0.5));
  CHECK(r.gamma_B == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.gamma_P == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(r.gamma_opt) < 1e-15);
}

TEST_CASE("fully sideband-resolved coupling is pure beam splitter") {
  const DerivedRates r = derived_rates(osc(1.0, kPi / 2.0, 0.0));
  CHECK(r.gamma_B == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.gamma_P == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r.gamma_opt == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hot-bath decoherence rate reproduces the 2pi x 10 kHz scale") {
  const DerivedRates r = derived_rates(osc(0.0, 0.0, kTwoPi * 0.1, 1e5));
  CHECK(r.gamma_tilde0 == doctest::Approx(kTwoPi * 10000.05).epsilon(1e-14));
  CHECK(r.gamma_tilde0 / kTwoPi == doctest::Approx(1e4).epsilon(1e-4));
}

TEST_CASE("cooperativity sentinel cases") {
  SUBCASE("defined") {
    const DerivedRates r = derived_rates(osc(10.0, 0.3, 2.0, 1.5));
    CHECK(r.cooperativity_defined);
    CHECK(r.cooperativity == doctest::Approx(10.0 / 4.0));
  }
  SUBCASE("zero coupling and zero decoherence") {
    const DerivedRates r = derived_rates(osc(0.0, 0.3));
    CHECK(r.cooperativity_defined);
    CHECK(r.cooperativity == 0.0);
  }
  SUBCASE("coupling without decoherence") {
    const DerivedRates r = derived_rates(osc(1.0, 0.3));
    CHECK_FALSE(r.cooperativity_defined);
    CHECK(std::isinf(r.cooperativity));
  }
}

TEST_CASE("from_cooperativity round trip and failure") {
  const OscillatorParams p =
      OscillatorParams::from_cooperativity(50.0, 0.35 * kPi, kTwoPi * 0.1, 1e5);
  CHECK(derived_rates(p).cooperativity == doctest::Approx(50.0).epsilon(1e-12));
  CHECK_THROWS_AS(OscillatorParams::from_cooperativity(1.0, 0.3, 0.0, 0.0),
                  CooperativityUndefined);
}

TEST_CASE("directional coupling vanishes for equal angles") {
  CascadeConfig c{osc(1.0, 0.3 * kPi, 0.1), osc(2.0, 0.3 * kPi, 0.1), {}};
  const DirectionalCoupling dc = directional_coupling(c);
  CHECK(std::abs(dc.rate) < 1e-12);
  CHECK(std::abs(dc.f) < 1e-12);
}

TEST_CASE("directional coupling sign follows the angle difference") {
  CascadeConfig c{osc(1.0, 0.35 * kPi, 0.1), osc(1.0, 0.30 * kPi, 0.1), {}};
  CHECK(directional_coupling(c).rate > 0.0);  // theta+ < theta-
  c.second.theta = 0.40 * kPi;
  CHECK(directional_coupling(c).rate < 0.0);  // theta+ > theta-
}

TEST_CASE("both algebraic forms of the directional coupling agree") {
  // equal strengths, theta- = 0.35pi, theta+ = 0.4pi, explicit gamma+
  const double gamma = 1.0;
  const double gamma0 = 0.1;
  CascadeConfig c{osc(gamma, 0.35 * kPi, gamma0), osc(gamma, 0.40 * kPi, gamma0), {}};
  const DirectionalCoupling dc = directional_coupling(c);
  const double product_form =
      std::sqrt(gamma * std::pow(std::sin(0.35 * kPi), 2) * gamma *
                std::pow(std::cos(0.40 * kPi), 2)) -
      std::sqrt(gamma * std::pow(std::sin(0.40 * kPi), 2) * gamma *
                std::pow(std::cos(0.35 * kPi), 2));
  const double sine_form = -gamma * std::sin(0.05 * kPi);
  const double gamma_plus = gamma0 - gamma * std::cos(0.8 * kPi);
  CHECK(dc.rate == doctest::Approx(product_form).epsilon(1e-14));
  CHECK(dc.rate == doctest::Approx(sine_form).epsilon(1e-12));
  CHECK(dc.f == doctest::Approx(2.0 * sine_form / gamma_plus).epsilon(1e-12));
}

TEST_CASE("directional coupling requires a damped downstream oscillator") {
  // theta+ = 0: pure parametric gain, gamma+ = gamma0 - Gamma < 0
  CascadeConfig c{osc(1.0, kPi / 4.0, 0.1), osc(1.0, 0.0, 0.1), {}};
  CHECK_THROWS_AS(directional_coupling(c), UnstableConfig);
}

TEST_CASE("validate flags pure parametric gain as unstable") {
  CascadeConfig c{osc(1.0, kPi / 4.0, 0.5), osc(2.0, 0.0, 1.0), {}};
  const ValidationReport report = validate(c);
  CHECK_FALSE(report.ok());
  CHECK(report.has(ConfigError::UnstableSecond));
}

TEST_CASE("validate rejects out-of-range loss") {
  CascadeConfig c{osc(1.0, kPi / 4.0, 0.5), osc(1.0, kPi / 4.0, 0.5), {1.2, 0.0}};
  const ValidationReport report = validate(c);
  CHECK(report.has(ConfigError::ChannelLossOutOfRange));
  CHECK_THROWS_AS(require_valid(c), ChannelLossOutOfRange);
}

TEST_CASE("validate warns when the resonance is not far detuned") {
  CascadeConfig c{osc(1.0, kPi / 4.0, 0.5), osc(1.0, kPi / 4.0, 0.5), {}};
  c.first.omega_eff = -10.0;  // |Omega| = 10 Gamma < 100 Gamma
  c.second.omega_eff = 10.0;
  const ValidationReport report = validate(c);
  CHECK(report.ok());
  CHECK(report.has(ConfigWarning::RwaQuestionableFirst));
  SUBCASE("far-detuned resonances stay quiet") {
    c.first.omega_eff = -1000.0;
    c.second.omega_eff = 1000.0;
    CHECK(validate(c).warnings.empty());
  }
}

TEST_CASE("validate rejects mismatched effective resonances") {
  CascadeConfig c{osc(1.0, kPi / 4.0, 0.5), osc(1.0, kPi / 4.0, 0.5), {}};
  c.first.omega_eff = 1000.0;
  c.second.omega_eff = 1000.0;  // same sign
  CHECK(validate(c).has(ConfigError::OmegaMismatch));
  c.second.omega_eff = -999.0;  // magnitude mismatch
  CHECK(validate(c).has(ConfigError::OmegaMismatch));
}

TEST_CASE("validate is pure") {
  CascadeConfig c{osc(1.0, 0.2, 0.5), osc(1.0, 0.0, 0.1), {0.4, 0.0}};
  const ValidationReport a = validate(c);
  const ValidationReport b = validate(c);
  REQUIRE(a.errors.size() == b.errors.size());
  for (std::size_t i = 0; i < a.errors.size(); ++i) {
    CHECK(a.errors[i] == b.errors[i]);
  }
}

TEST_CASE("rate identities hold for random parameters") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.0, kPi / 2.0);
  std::uniform_real_distribution<double> log_gamma(-3.0, 8.0);
  for (int i = 0; i < 2000; ++i) {
    const double gamma = std::exp(log_gamma(rng));
    const double theta = angle(rng);
    const DerivedRates r = derived_rates(osc(gamma, theta, 1.0, 2.0));
    CHECK(r.gamma_B >= 0.0);
    CHECK(r.gamma_P >= 0.0);
    CHECK(r.gamma_B + r.gamma_P == gamma);  // exact by construction
    CHECK(std::abs(r.gamma_opt + gamma * std::cos(2.0 * theta)) <=
          1e-12 * gamma);
  }
}

TEST_CASE("directional coupling forms agree to 1e-12 for random parameters") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> angle(0.0, kPi / 2.0);
  std::uniform_real_distribution<double> log_gamma(-2.0, 6.0);
  for (int i = 0; i < 2000; ++i) {
    CascadeConfig c{osc(std::exp(log_gamma(rng)), angle(rng), 1.0, 0.0),
                    osc(std::exp(log_gamma(rng)), angle(rng), 1.0, 0.0),
                    {}};
    if (derived_rates(c.second).gamma_total <= 0.0) continue;
    const double scale = std::sqrt(c.first.gamma * c.second.gamma);
    const double sine_form = -scale * std::sin(c.second.theta - c.first.theta);
    CHECK(std::abs(directional_coupling(c).rate - sine_form) <=
          1e-12 * std::max(scale, 1.0));
  }
}

TEST_SUITE_END();
