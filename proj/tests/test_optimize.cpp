#include <array>
#include <cmath>

#include <doctest.h>

#include "steerlab/optimize.hpp"

using namespace steerlab;

namespace {

constexpr double kPi = kTwoPi / 2.0;

OptimizationProblem hot_problem(double c_minus, double epsilon,
                                Objective objective = Objective::EPlusGivenMinus) {
  OptimizationProblem p;
  p.base = scenario_config(ThermalScenario::HotHot, c_minus, c_minus, kPi / 4.0,
                           kPi / 4.0, epsilon);
  p.objective = objective;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("optimize");

TEST_CASE("free angles never lose to forced-symmetric angles") {
  for (double c_minus : {5.0, 20.0}) {
    for (double eps : {0.0, 0.2}) {
      OptimizationProblem p = hot_problem(c_minus, eps);
      const OptResult free_r = minimize(p);
      p.mode = AngleMode::SymmetricAngles;
      const OptResult sym_r = minimize(p);
      CHECK(free_r.e_opt <= sym_r.e_opt + 1e-12);
      CHECK(free_r.converged);
      CHECK(sym_r.converged);
    }
  }
}

TEST_CASE("hot-bath optimum uses a QND client and a cooling server") {
  const OptResult r = minimize(hot_problem(10.0, 0.0));
  CHECK(r.optimum.first.theta == doctest::Approx(kPi / 4.0).epsilon(0.02));
  CHECK(r.optimum.second.theta > kPi / 4.0);  // f < 0 at the optimum
  CHECK(directional_coupling(r.optimum).f < 0.0);
  CHECK(r.e_opt == doctest::Approx(0.285044).epsilon(2e-3));
  CHECK(r.classification == SteeringClass::TwoWay);
}

TEST_CASE("every reported optimum satisfies the stability margin") {
  for (double eps : {0.0, 0.3}) {
    const OptResult r = minimize(hot_problem(7.0, eps));
    const DerivedRates rm = derived_rates(r.optimum.first);
    const DerivedRates rp = derived_rates(r.optimum.second);
    CHECK(rm.gamma_total >=
          1e-6 * std::max(r.optimum.first.gamma, r.optimum.first.gamma0));
    CHECK(rp.gamma_total >=
          1e-6 * std::max(r.optimum.second.gamma, r.optimum.second.gamma0));
  }
}

TEST_CASE("objective trace is monotone and the optimum beats every stage") {
  const OptResult r = minimize(hot_problem(10.0, 0.1));
  REQUIRE_FALSE(r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    CHECK(r.trace[i] <= r.trace[i - 1] + 1e-15);
  }
  CHECK(r.e_opt <= r.trace.front());
}

TEST_CASE("a finer initial grid barely moves the optimum") {
  OptimizationProblem p = hot_problem(10.0, 0.2);
  const OptResult coarse = minimize(p);
  p.cooperativity_points_per_decade *= 2;
  p.angle_points = 2 * p.angle_points - 1;
  const OptResult fine = minimize(p);
  CHECK(std::abs(fine.e_opt - coarse.e_opt) <= 1e-4 * coarse.e_opt);
}

TEST_CASE("symmetric-angle steering swaps exactly with the cooperativities") {
  // f = 0 identity behind the mirrored-problem test below.
  for (double a : {3.0, 12.0, 70.0}) {
    for (double b : {5.0, 33.0}) {
      const CascadeConfig fwd = scenario_config(ThermalScenario::HotHot, a, b,
                                                0.37 * kPi, 0.37 * kPi, 0.0);
      const CascadeConfig swp = scenario_config(ThermalScenario::HotHot, b, a,
                                                0.37 * kPi, 0.37 * kPi, 0.0);
      const SteeringReport rf = steering_parameters(rwa_moments(fwd));
      const SteeringReport rs = steering_parameters(rwa_moments(swp));
      CHECK(rf.e_plus_given_minus ==
            doctest::Approx(rs.e_minus_given_plus).epsilon(1e-12));
    }
  }
}

TEST_CASE("mirrored symmetric-angle problems share their optimal value") {
  // With f forced to zero the steering parameters swap exactly under a
  // cooperativity swap, so minimizing E+|- over C+ at fixed C- equals
  // minimizing E-|+ over C- at fixed C+ (identical thermal parameters).
  // The two searches run over different coordinates of mirrored landscapes.
  OptimizationProblem forward = hot_problem(12.0, 0.0);
  forward.mode = AngleMode::SymmetricAngles;
  const OptResult f_r = minimize(forward);

  OptimizationProblem mirrored = hot_problem(12.0, 0.0);
  mirrored.mode = AngleMode::SymmetricAngles;
  mirrored.objective = Objective::EMinusGivenPlus;
  mirrored.free_c_plus = false;
  mirrored.free_c_minus = true;
  const OptResult m_r = minimize(mirrored);
  CHECK(f_r.e_opt == doctest::Approx(m_r.e_opt).epsilon(1e-6));
}

TEST_CASE("placing the fixed-tunability oscillator upstream is optimal") {
  // Client with pinned cooperativity and QND angle; server fully tunable.
  // Steering the server: client-first beats server-first.
  const double client_c = 5.0;
  OptimizationProblem client_first = hot_problem(client_c, 0.0);
  client_first.free_theta_minus = false;  // client angle pinned at pi/4
  const OptResult a = minimize(client_first);

  OptimizationProblem server_first;
  server_first.base = scenario_config(ThermalScenario::HotHot, client_c, client_c,
                                      kPi / 4.0, kPi / 4.0, 0.0);
  std::swap(server_first.base.first, server_first.base.second);
  server_first.objective = Objective::EMinusGivenPlus;  // steer the upstream server
  server_first.free_c_plus = false;
  server_first.free_c_minus = true;  // server coupling is the free one
  server_first.free_theta_plus = false;  // client angle pinned at pi/4
  const OptResult b = minimize(server_first);
  CHECK(a.e_opt <= b.e_opt + 1e-9);
}

TEST_CASE("an all-unstable box reports an empty feasible set") {
  OptimizationProblem p = hot_problem(50.0, 0.0);
  p.free_theta_minus = false;
  p.free_theta_plus = false;
  p.base.first.theta = 0.1;  // parametric-gain dominated, gamma- < 0
  CHECK_THROWS_AS(minimize(p), EmptyFeasibleSet);
}

TEST_CASE("optimal curve approaches equal cooperativities at large C-") {
  const std::array<double, 1> grid{1000.0};
  const std::vector<CurvePoint> curve =
      optimal_curve(Objective::EPlusGivenMinus, grid, ThermalScenario::HotHot, 0.0);
  REQUIRE(curve.size() == 2);  // one free, one symmetric point
  for (const CurvePoint& pt : curve) {
    CHECK(pt.converged);
    if (pt.mode == AngleMode::FreeAngles) {
      CHECK(pt.c_plus_ratio == doctest::Approx(1.0).epsilon(0.05));
      CHECK(pt.theta_minus == doctest::Approx(kPi / 4.0).epsilon(0.02));
    }
  }
  CHECK(curve[1].e_opt >= curve[0].e_opt - 1e-12);  // symmetric never wins
}

TEST_CASE("loss tolerance is non-increasing in the server occupation") {
  // same server linewidth, increasingly hot server bath
  double previous = 1.1;
  for (double nbar_plus : {0.0, 0.5, 2.0}) {
    OptimizationProblem p;
    p.base = scenario_config(ThermalScenario::HotHot, 5.0, 5.0, kPi / 4.0,
                             kPi / 4.0, 0.0);
    p.base.second.gamma0 = kTwoPi * 2e4;
    p.base.second.nbar = nbar_plus;
    p.base.second.gamma = 5.0 * p.base.second.thermal_decoherence();
    const double eps_max = loss_tolerance(p, 0.5);
    CHECK(eps_max <= previous + 1e-3);
    previous = eps_max;
  }
}

TEST_CASE("the zero channel phase is optimal") {
  const CascadeConfig c = scenario_config(ThermalScenario::HotHot, 50.0, 60.0,
                                          kPi / 4.0, 0.4 * kPi, 0.1);
  const auto sweep = phi_sweep(c, Objective::EPlusGivenMinus, 25);
  double best_phi = 1.0;
  double best_e = std::numeric_limits<double>::infinity();
  for (const auto& [phi, e] : sweep) {
    if (e < best_e) {
      best_e = e;
      best_phi = phi;
    }
  }
  CHECK(std::abs(best_phi) < 1e-12);  // grid midpoint is exactly zero
}

TEST_SUITE_END();
