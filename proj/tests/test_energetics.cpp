#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "thermoengine/energetics.hpp"
#include "thermoengine/errors.hpp"

using thermo::CovarianceState;
using thermo::EngineParams;
using thermo::ErrorCode;
using thermo::Model;
using thermo::Protocol;
using thermo::TemperatureProfile;
using thermo::Trajectory;

namespace {

thermo::ProfilePtr carnot411() {
  return std::make_shared<TemperatureProfile>(
      TemperatureProfile::carnot(4.0, 1.0, 1.0));
}

EngineParams unit_params(double q0 = 100.0) {
  return {1.0, 1.0, 1.0, 1.0, q0};
}

Trajectory optimal_reduced_cycle(const thermo::ProfilePtr& prof,
                                 const EngineParams& params) {
  const auto q = thermo::max_power_protocol(prof, params);
  const auto sigma = thermo::max_power_sigma(prof, params);
  return thermo::integrate_reduced(*prof, q, params, sigma.eval(0.0));
}

}  // namespace

TEST_CASE("instantaneous rates") {
  const EngineParams params = unit_params();
  // Equilibrium with a frozen trap exchanges nothing on average.
  const auto r0 = thermo::rates({0.02, 0.0, 2.0}, 100.0, 0.0, 2.0, params);
  CHECK(r0.dW == 0.0);
  CHECK(std::abs(r0.dQ) < 1e-15);
  // Overheated ensemble dumps heat at rate gamma(k_B T/m - Sigma_v).
  const auto r1 = thermo::rates({0.04, 0.0, 4.0}, 100.0, 0.0, 2.0, params);
  CHECK(r1.dQ == doctest::Approx(-2.0).epsilon(1e-14));
  // Work rate follows qdot Sigma_x / 2.
  const auto r2 = thermo::rates({0.5, 0.0, 2.0}, 100.0, 3.0, 2.0, params);
  CHECK(r2.dW == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("cycle power: optimal two-level pair draws Var(sqrt T)") {
  const auto prof = carnot411();
  const auto params = unit_params();
  const auto q = thermo::max_power_protocol(prof, params);
  const auto traj = optimal_reduced_cycle(prof, params);
  const auto p = thermo::cycle_power(traj, q, *prof, params, 1e-7);
  CHECK(p.heat_side == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(p.work_side == doctest::Approx(0.25).epsilon(1e-6));
  // Route agreement at the integrator tolerance scale.
  CHECK(std::abs(p.heat_side - p.work_side) < 1e-8 * 2.5);
}

TEST_CASE("cycle power: single bath cannot yield positive power") {
  const auto prof = std::make_shared<TemperatureProfile>(
      TemperatureProfile::constant(2.0, 1.0));
  const EngineParams params = unit_params(50.0);
  // A deliberately non-optimal periodic protocol on a constant bath.
  const Protocol wiggle(
      1.0, {{0.0, 1.0, thermo::protocol_piece::LinearResponseForm{
                           50.0, 0.3, 2.0 * M_PI, 0.0}}});
  const auto orbit = thermo::find_periodic_orbit(Model::Reduced, *prof, wiggle,
                                                 params);
  const auto p = thermo::cycle_power(orbit.trajectory, wiggle, *prof, params);
  CHECK(p.heat_side <= 1e-10);

  const auto flat = Protocol::constant(50.0, 1.0);
  const auto orbit2 =
      thermo::find_periodic_orbit(Model::Reduced, *prof, flat, params);
  const auto p2 = thermo::cycle_power(orbit2.trajectory, flat, *prof, params);
  CHECK(std::abs(p2.heat_side) < 1e-10);
}

TEST_CASE("cycle power rejects non-periodic trajectories") {
  const auto prof = carnot411();
  const auto params = unit_params();
  const auto q = thermo::max_power_protocol(prof, params);
  const auto stray = thermo::integrate_reduced(*prof, q, params, 5.0);
  bool got = false;
  try {
    thermo::cycle_power(Trajectory{stray}, q, *prof, params);
  } catch (const thermo::Error& e) {
    got = e.code() == ErrorCode::NotPeriodic;
  }
  CHECK(got);
}

TEST_CASE("full-model power degrades outside the low-friction regime") {
  const auto prof = carnot411();
  EngineParams params{1.0, 1.0, 1.0, 1.0, 1.0};  // gamma/sqrt(m q0) = 1
  const auto q = thermo::max_power_protocol(prof, params);
  const auto orbit = thermo::find_periodic_orbit(Model::Full, *prof, q, params);
  const auto p = thermo::cycle_power(orbit.trajectory, q, *prof, params, 1e-7).heat_side;
  CHECK(p < 0.9 * 0.25);
}

TEST_CASE("ledger: efficiency one-half at maximum power") {
  const auto prof = carnot411();
  const auto params = unit_params();
  const auto q = thermo::max_power_protocol(prof, params);
  const auto traj = optimal_reduced_cycle(prof, params);
  const auto ledger = thermo::cycle_ledger(traj, q, *prof, params, 1e-7);
  CHECK(ledger.power == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(ledger.eta_U == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(ledger.uptake ==
        doctest::Approx(-ledger.work + ledger.dissipation).epsilon(1e-10));
  CHECK(ledger.dissipation >= -1e-10);
  REQUIRE(ledger.eta_Q.has_value());
  CHECK(*ledger.eta_Q == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("ledger: quasi-static cycle has unit efficiency, no dissipation") {
  const auto prof = std::make_shared<TemperatureProfile>(
      TemperatureProfile::sinusoid(2.5, 1.5, 1.0));
  const auto params = unit_params();
  const auto q = thermo::fixed_power_protocol(prof, params, 0.0);
  const auto orbit =
      thermo::find_periodic_orbit(Model::Reduced, *prof, q, params);
  const auto ledger = thermo::cycle_ledger(orbit.trajectory, q, *prof, params);
  CHECK(std::abs(ledger.dissipation) < 1e-6);
  CHECK(ledger.quasi_static);
  CHECK(ledger.eta_U == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ledger efficiency cross-checks the closed-form optimum") {
  const auto prof = carnot411();
  const auto params = unit_params();
  const double P = 0.125;
  const auto q = thermo::fixed_power_protocol(prof, params, P);
  const auto sigma = thermo::fixed_power_sigma(prof, params, P);
  const auto traj =
      thermo::integrate_reduced(*prof, q, params, sigma.eval(0.0));
  const auto ledger = thermo::cycle_ledger(traj, q, *prof, params, 1e-7);
  CHECK(ledger.power == doctest::Approx(P).epsilon(1e-6));
  const double eta_formula =
      thermo::max_efficiency_at_power(*prof, params, P);
  CHECK(ledger.eta_U == doctest::Approx(eta_formula).epsilon(1e-6));
}

TEST_CASE("ledger second law across power levels and profiles") {
  const std::vector<thermo::ProfilePtr> profiles = {
      carnot411(),
      std::make_shared<TemperatureProfile>(
          TemperatureProfile::sinusoid(2.5, 1.5, 1.0)),
      std::make_shared<TemperatureProfile>(
          TemperatureProfile::two_level(4.0, 1.0, 1.0, 0.9)),
  };
  const auto params = unit_params();
  for (const auto& prof : profiles) {
    const double p_star = thermo::max_power_value(*prof, params);
    for (double frac : {0.2, 0.7}) {
      const double P = frac * p_star;
      const auto q = thermo::fixed_power_protocol(prof, params, P);
      const auto sigma = thermo::fixed_power_sigma(prof, params, P);
      const auto traj =
          thermo::integrate_reduced(*prof, q, params, sigma.eval(0.0));
      const auto ledger = thermo::cycle_ledger(traj, q, *prof, params, 1e-7);
      CHECK(ledger.dissipation >= -1e-10);
      CHECK(ledger.eta_U > 0.0);
      CHECK(ledger.eta_U <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("full-model ledger matches the reduced one at low friction") {
  const auto prof = std::make_shared<TemperatureProfile>(
      TemperatureProfile::sinusoid(2.5, 1.5, 1.0));
  EngineParams params{1.0, 1.0, 1.0, 1.0, 1e6};
  const auto q = thermo::max_power_protocol(prof, params);
  const auto red = thermo::find_periodic_orbit(Model::Reduced, *prof, q,
                                               params);
  const auto full = thermo::find_periodic_orbit(Model::Full, *prof, q, params);
  const auto lr = thermo::cycle_ledger(red.trajectory, q, *prof, params, 1e-7);
  const auto lf =
      thermo::cycle_ledger(full.trajectory, q, *prof, params, 1e-7);
  CHECK(lf.power == doctest::Approx(lr.power).epsilon(1e-3));
  CHECK(lf.eta_U == doctest::Approx(lr.eta_U).epsilon(1e-2));
  CHECK(lf.dissipation >= -1e-10);
}

TEST_CASE("classical efficiency: Curzon-Ahlborn at maximum power") {
  const auto prof = carnot411();
  const auto params = unit_params();
  const auto q = thermo::max_power_protocol(prof, params);
  const auto traj = optimal_reduced_cycle(prof, params);
  const double eta =
      thermo::eta_q_carnot(traj, q, *prof, params, 1e-7);
  CHECK(eta == doctest::Approx(1.0 - std::sqrt(1.0 / 4.0)).epsilon(1e-6));
}

TEST_CASE("classical efficiency rises toward Carnot as power vanishes") {
  const auto prof = carnot411();
  const auto params = unit_params();
  const double carnot_bound = 1.0 - 1.0 / 4.0;
  double prev = 0.0;
  for (double frac : {0.8, 0.3, 0.05, 0.005}) {
    const double P = frac * 0.25;
    const auto q = thermo::fixed_power_protocol(prof, params, P);
    const auto sigma = thermo::fixed_power_sigma(prof, params, P);
    const auto traj =
        thermo::integrate_reduced(*prof, q, params, sigma.eval(0.0));
    const double eta = thermo::eta_q_carnot(traj, q, *prof, params, 1e-7);
    CHECK(eta <= carnot_bound + 1e-9);
    CHECK(eta > prev);
    prev = eta;
  }
  CHECK(prev > 0.7);  // approaches 0.75 from below
}

TEST_CASE("classical efficiency guards") {
  const auto params = unit_params();
  // Not a two-level profile: the hot bath is ambiguous.
  const auto sin = std::make_shared<TemperatureProfile>(
      TemperatureProfile::sinusoid(2.5, 1.5, 1.0));
  const auto qs = thermo::max_power_protocol(sin, params);
  const auto orbit =
      thermo::find_periodic_orbit(Model::Reduced, *sin, qs, params);
  bool not_carnot = false;
  try {
    thermo::eta_q_carnot(orbit.trajectory, qs, *sin, params);
  } catch (const thermo::Error& e) {
    not_carnot = e.code() == ErrorCode::NotCarnotProfile;
  }
  CHECK(not_carnot);

  // Equal temperatures: valid profile, degenerate (zero-work) cycle.
  const auto flat = std::make_shared<TemperatureProfile>(
      TemperatureProfile::two_level(2.0, 2.0, 1.0, 0.5));
  const auto qf = Protocol::constant(100.0, 1.0);
  const auto orbit2 =
      thermo::find_periodic_orbit(Model::Reduced, *flat, qf, params);
  bool degenerate = false;
  try {
    thermo::eta_q_carnot(orbit2.trajectory, qf, *flat, params);
  } catch (const thermo::Error& e) {
    degenerate = e.code() == ErrorCode::DegenerateCycle;
  }
  CHECK(degenerate);
}

TEST_CASE("hot-half heat matches the closed form at maximum power") {
  // Q_h = (gamma k_B / m)(t_f/4) sqrt(T_h)(sqrt(T_h) - sqrt(T_c)) = 0.5.
  const auto prof = carnot411();
  const auto params = unit_params();
  const auto traj = optimal_reduced_cycle(prof, params);
  const auto& rt = std::get<thermo::ReducedTrajectory>(traj);
  const int n = 40'000;
  double q_h = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * 0.5 / n;
    q_h += (prof->eval(t) - rt.sigma_v(t)) * 0.5 / n;
  }
  CHECK(q_h == doctest::Approx(0.5).epsilon(1e-6));
}
