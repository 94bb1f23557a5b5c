#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "thermoengine/errors.hpp"
#include "thermoengine/profiles.hpp"

using thermo::ErrorCode;
using thermo::TemperatureProfile;

namespace {
bool fails_with(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const thermo::Error& e) {
    return e.code() == code;
  }
  return false;
}
}  // namespace

TEST_CASE("evaluation follows the right-limit convention") {
  const auto carnot = TemperatureProfile::carnot(4.0, 1.0, 1.0);
  CHECK(carnot.eval(0.25) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(carnot.eval(0.5) == doctest::Approx(1.0).epsilon(1e-14));  // T(0.5+)
  CHECK(carnot.eval(0.75) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(carnot.eval(0.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(carnot.eval(1.0) == doctest::Approx(4.0).epsilon(1e-14));  // wraps
  CHECK(carnot.eval_left(0.5) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(carnot.eval_left(1.0) == doctest::Approx(1.0).epsilon(1e-14));

  const auto c = TemperatureProfile::constant(2.0, 3.0);
  for (double t : {0.0, 0.3, 1.5, 2.9999, 17.0, -4.2}) {
    CHECK(c.eval(t) == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("periodic extension matches the base period to machine precision") {
  const auto sin = TemperatureProfile::sinusoid(2.5, 1.5, 1.0);
  for (double t : {0.0, 0.125, 0.71, 0.99}) {
    CHECK(sin.eval(t + 1.0) == doctest::Approx(sin.eval(t)).epsilon(1e-15));
    CHECK(sin.eval(t - 3.0) == doctest::Approx(sin.eval(t)).epsilon(1e-13));
  }
}

TEST_CASE("jump bookkeeping") {
  const auto carnot = TemperatureProfile::carnot(4.0, 1.0, 1.0);
  REQUIRE(carnot.jump_times().size() == 1);
  CHECK(carnot.jump_times()[0] == doctest::Approx(0.5));
  CHECK(carnot.has_wrap_jump());

  const auto sin = TemperatureProfile::sinusoid(2.5, 1.5, 1.0);
  CHECK(sin.jump_times().empty());
  CHECK(!sin.has_wrap_jump());
}

TEST_CASE("validation rejects bad profiles") {
  CHECK(fails_with(ErrorCode::InvalidArgument, [] {
    TemperatureProfile::constant(-1.0, 1.0);
  }));
  CHECK(fails_with(ErrorCode::InvalidArgument, [] {
    TemperatureProfile::sinusoid(1.0, 1.5, 1.0);  // dips below zero
  }));
  CHECK(fails_with(ErrorCode::InvalidArgument, [] {
    TemperatureProfile(1.0, {{0.0, 0.4, thermo::ConstantPiece{1.0}},
                             {0.5, 1.0, thermo::ConstantPiece{2.0}}});
  }));
  CHECK(fails_with(ErrorCode::InvalidArgument, [] {
    TemperatureProfile::constant(1.0, -2.0);
  }));
  // A sinusoid piece that dips negative only in the interior of the piece.
  CHECK(fails_with(ErrorCode::InvalidArgument, [] {
    TemperatureProfile(1.0, {{0.0, 1.0, thermo::SinusoidPiece{
                                            0.5, 1.0, 2.0 * M_PI, 0.0}}});
  }));
}

TEST_CASE("sampled profiles interpolate linearly in T") {
  const auto prof = TemperatureProfile::sampled(
      {{0.0, 1.0}, {0.5, 3.0}, {1.0, 1.0}}, 1.0);
  CHECK(prof.eval(0.25) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(prof.eval(0.75) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(prof.jump_times().empty());
  CHECK(!prof.has_wrap_jump());
}

TEST_CASE("integrate: two-level and constant cases") {
  const auto carnot = TemperatureProfile::carnot(4.0, 1.0, 1.0);
  const double s = carnot.integrate([](double T) { return std::sqrt(T); },
                                    0.0, 1.0);
  CHECK(s == doctest::Approx(1.5).epsilon(1e-13));

  const auto flat = TemperatureProfile::sinusoid(1.0, 0.0, 1.0);
  CHECK(flat.integrate([](double T) { return T; }, 0.0, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("integrate: sinusoid sqrt moment against the trapezoid oracle") {
  // Frozen from oracles::trapezoid with 1e7 panels.
  const double frozen = 1.5419644251900397;
  const auto sin = TemperatureProfile::sinusoid(2.5, 1.5, 1.0);
  const double live = oracles::trapezoid(
      [&](double t) { return std::sqrt(2.5 + 1.5 * std::cos(2 * M_PI * t)); },
      0.0, 1.0, 10'000'000);
  CHECK(live == doctest::Approx(frozen).epsilon(1e-12));
  const double got =
      sin.integrate([](double T) { return std::sqrt(T); }, 0.0, 1.0);
  CHECK(got == doctest::Approx(frozen).epsilon(1e-10));
}

TEST_CASE("quadrature is exact for polynomials on a linear piece") {
  // T runs linearly 1 -> 3, so f(T) = T^d is a degree-d polynomial in t.
  const auto lin = TemperatureProfile::sampled({{0.0, 1.0}, {1.0, 3.0}}, 1.0);
  // Exact antiderivative: int_0^1 (1+2t)^d dt = (3^{d+1} - 1)/(2(d+1)).
  for (int d : {1, 2, 3, 5, 8, 12}) {
    const double expect =
        (std::pow(3.0, d + 1) - 1.0) / (2.0 * (d + 1));
    const double got = lin.integrate(
        [d](double T) { return std::pow(T, d); }, 0.0, 1.0);
    CHECK(got == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("integration over any shifted period matches the base period") {
  const auto carnot = TemperatureProfile::carnot(4.0, 1.0, 1.0);
  const auto f = [](double T) { return std::sqrt(T) + 0.2 * T; };
  const double base = carnot.integrate(f, 0.0, 1.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> shift(0.0, 3.0);
  for (int i = 0; i < 8; ++i) {
    const double s = shift(rng);
    CHECK(carnot.integrate(f, s, s + 1.0) ==
          doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("quadrature refinement failure raises NonConvergent") {
  thermo::QuadOptions tight_budget;  // oscillatory integrand, low level cap
  tight_budget.max_levels = 6;
  const TemperatureProfile lin(
      1.0, {{0.0, 1.0, thermo::LinearPiece{1.0, 3.0}}}, tight_budget);
  CHECK(fails_with(ErrorCode::NonConvergent, [&] {
    lin.integrate([](double T) { return std::cos(1e7 * T); }, 0.0, 1.0);
  }));
}

TEST_CASE("moments: two-level closed forms") {
  const auto carnot = TemperatureProfile::carnot(4.0, 1.0, 1.0);
  const auto m = carnot.moments();
  CHECK(m.mean_T == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(m.mean_sqrtT == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(m.mean_T32 == doctest::Approx(4.5).epsilon(1e-13));
  CHECK(m.var_sqrtT == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(std::abs(m.mu3_sqrtT) < 1e-12);  // symmetric +-0.5 about the mean
}

TEST_CASE("moments: constant profile has no sqrt-T spread") {
  const auto c = TemperatureProfile::constant(2.0, 1.0);
  const auto m = c.moments();
  CHECK(std::abs(m.var_sqrtT) < 1e-12);
  CHECK(std::abs(m.mu3_sqrtT) < 1e-12);
}

TEST_CASE("moments: sinusoid variance against the trapezoid oracle") {
  const double frozen_var = 0.12234571144834927;  // 1e7-panel trapezoid
  const auto sin = TemperatureProfile::sinusoid(2.5, 1.5, 1.0);
  const auto m = sin.moments();
  CHECK(m.var_sqrtT == doctest::Approx(frozen_var).epsilon(1e-9));
  CHECK(m.mean_T == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("moment inequalities hold on randomized profiles") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    TemperatureProfile prof = [&]() -> TemperatureProfile {
      const int kind = static_cast<int>(u(rng) * 3.0);
      const double tf = 0.5 + 2.0 * u(rng);
      if (kind == 0) {
        return TemperatureProfile::two_level(1.0 + 4.0 * u(rng),
                                             0.2 + 0.8 * u(rng), tf,
                                             0.2 + 0.6 * u(rng));
      }
      if (kind == 1) {
        const double mean = 1.0 + 3.0 * u(rng);
        return TemperatureProfile::sinusoid(mean, 0.9 * mean * u(rng), tf,
                                            2.0 * M_PI * u(rng));
      }
      std::vector<std::pair<double, double>> knots;
      const int nk = 3 + static_cast<int>(u(rng) * 4.0);
      for (int k = 0; k <= nk; ++k)
        knots.emplace_back(tf * k / nk, 0.5 + 4.0 * u(rng));
      return TemperatureProfile::sampled(knots, tf);
    }();
    const auto m = prof.moments();
    CHECK(m.var_sqrtT >= -1e-12);
    // Cov(sqrt T, T) >= 0: both are increasing functions of T.
    CHECK(m.mean_T32 - m.mean_T * m.mean_sqrtT >= -1e-12);
    if (prof.is_constant()) CHECK(std::abs(m.var_sqrtT) < 1e-12);
  }
}

TEST_CASE("cumulative tables agree with direct integration") {
  const auto sin = TemperatureProfile::sinusoid(2.5, 1.5, 1.0, 0.7);
  const auto cum = sin.cumulative([](double T) { return std::sqrt(T); });
  for (double t : {0.1, 0.25, 0.5, 0.77, 1.0}) {
    const double direct =
        sin.integrate([](double T) { return std::sqrt(T); }, 0.0, t);
    CHECK(cum.value(t) == doctest::Approx(direct).epsilon(1e-11));
  }
  CHECK(cum.value(1.0) == doctest::Approx(cum.total()).epsilon(1e-15));
}
