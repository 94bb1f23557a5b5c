#include "thermoengine/energetics.hpp"

#include <cmath>
#include <string>

#include "thermoengine/errors.hpp"
#include "thermoengine/quadrature.hpp"

namespace thermo {
namespace {

// Gauss pass of fn(t) over every dense step, optionally clipped to [a, b].
// Step intervals never straddle profile/protocol boundaries, so fn may use
// the step midpoint as the pin for piecewise quantities.
template <int N, typename Fn>
double integrate_steps(const detail::PiecewiseTrajectory<N>& path, double a,
                       double b, const Fn& fn) {
  double acc = 0.0;
  for (const auto& st : path.steps()) {
    const double lo = std::max(a, st.t0);
    const double hi = std::min(b, st.t1);
    if (hi <= lo) continue;
    acc += quad::panel(
        [&](double t) { return fn(t, st.eval(t), 0.5 * (st.t0 + st.t1)); },
        lo, hi);
  }
  return acc;
}

struct Periodicity {
  double residual;
};

template <int N>
double rel_gap(const std::array<double, N>& a, const std::array<double, N>& b,
               int i, double scale) {
  return std::abs(a[i] - b[i]) / scale;
}

Periodicity check_periodic(const Trajectory& traj, double tol) {
  double res = 0.0;
  if (const auto* r = std::get_if<ReducedTrajectory>(&traj)) {
    const double s0 = r->sigma_v_begin();
    const double s1 = r->sigma_v_end();
    res = std::abs(s1 - s0) / std::max(s0, s1);
  } else {
    const auto& f = std::get<FullTrajectory>(traj);
    const auto y0 = f.path.state_begin();
    const auto y1 = f.path.state_end();
    const double sx = std::max(y0[0], y1[0]);
    const double sv = std::max(y0[2], y1[2]);
    res = std::max({rel_gap<3>(y0, y1, 0, sx), rel_gap<3>(y0, y1, 2, sv),
                    rel_gap<3>(y0, y1, 1, std::sqrt(sx * sv))});
  }
  require(res <= tol, ErrorCode::NotPeriodic,
          "trajectory endpoints do not close a periodic cycle");
  return {res};
}

// Work accumulated by the trajectory, including instantaneous-jump
// contributions. In the reduced model the jump work equals the energy jump
// m * dSigma_v (heat is continuous across an instantaneous q change); in the
// full model it is dq * Sigma_x / 2 with the state continuous.
double work_side_total(const Trajectory& traj, const Protocol& protocol,
                       const EngineParams& params) {
  const double m = params.m;
  if (const auto* r = std::get_if<ReducedTrajectory>(&traj)) {
    double w = integrate_steps<1>(
        r->path, 0.0, protocol.period(),
        [&](double t, const std::array<double, 1>& y, double pin) {
          // qdot Sigma_x / 2 with Sigma_x = m Sigma_v / q under equipartition
          return 0.5 * protocol.log_derivative_pinned(t, pin) * m * y[0];
        });
    for (const auto& j : r->path.jumps()) w += m * (j.right[0] - j.left[0]);
    return w;
  }
  const auto& f = std::get<FullTrajectory>(traj);
  double w = integrate_steps<3>(
      f.path, 0.0, protocol.period(),
      [&](double t, const std::array<double, 3>& y, double pin) {
        return 0.5 * protocol.log_derivative_pinned(t, pin) *
               protocol.eval_pinned(t, pin) * y[0];
      });
  auto jump_work = [&](double t_j, double q_left, double q_right) {
    const auto y = f.path.eval(t_j);
    return 0.5 * (q_right - q_left) * y[0];
  };
  for (double t_j : protocol.jump_times())
    w += jump_work(t_j, protocol.eval_left(t_j), protocol.eval(t_j));
  if (protocol.has_wrap_jump())
    w += jump_work(protocol.period(), protocol.q_end_left(),
                   protocol.q_start());
  return w;
}

double heat_integral(const Trajectory& traj,
                     const TemperatureProfile& profile,
                     const EngineParams& params, double a, double b) {
  const double c = params.gamma * params.k_B / params.m;
  const auto rate = [&](double t, double sigma_v, double pin) {
    return c * profile.eval_pinned(t, pin) - params.gamma * sigma_v;
  };
  if (const auto* r = std::get_if<ReducedTrajectory>(&traj)) {
    return integrate_steps<1>(
        r->path, a, b,
        [&](double t, const std::array<double, 1>& y, double pin) {
          return rate(t, y[0], pin);
        });
  }
  const auto& f = std::get<FullTrajectory>(traj);
  return integrate_steps<3>(
      f.path, a, b, [&](double t, const std::array<double, 3>& y, double pin) {
        return rate(t, y[2], pin);
      });
}

double gaussian_entropy(double det) {
  // S of a 2-D Gaussian with covariance determinant det.
  return 0.5 * std::log(4.0 * M_PI * M_PI * M_E * M_E * det);
}

// Uptake U = -k_B int S dT, taken from 0+ to t_f+ (Stieltjes: smooth parts
// plus S * dT atoms at temperature jumps, including the period wrap).
double uptake_entropy_route(const FullTrajectory& traj,
                            const TemperatureProfile& profile,
                            const EngineParams& params) {
  const double smooth = integrate_steps<3>(
      traj.path, 0.0, profile.period(),
      [&](double t, const std::array<double, 3>& y, double pin) {
        const double det = y[0] * y[2] - y[1] * y[1];
        return gaussian_entropy(det) * profile.derivative_pinned(t, pin);
      });
  double atoms = 0.0;
  auto add_atom = [&](double t_j, double dT) {
    const auto y = traj.path.eval(t_j);
    atoms += gaussian_entropy(y[0] * y[2] - y[1] * y[1]) * dT;
  };
  for (double t_j : profile.jump_times())
    add_atom(t_j, profile.eval(t_j) - profile.eval_left(t_j));
  if (profile.has_wrap_jump())
    add_atom(profile.period(),
             profile.eval(0.0) - profile.eval_left(profile.period()));
  return -params.k_B * (smooth + atoms);
}

double uptake_reduced_form(const ReducedTrajectory& traj,
                           const TemperatureProfile& profile,
                           const EngineParams& params) {
  const double kB = params.k_B;
  const double m = params.m;
  const double g = params.gamma;
  const double i1 = integrate_steps<1>(
      traj.path, 0.0, profile.period(),
      [&](double t, const std::array<double, 1>& y, double pin) {
        const double T = profile.eval_pinned(t, pin);
        return T * T / y[0];
      });
  const double i2 = integrate_steps<1>(
      traj.path, 0.0, profile.period(),
      [&](double t, const std::array<double, 1>&, double pin) {
        return profile.eval_pinned(t, pin);
      });
  return kB * kB * g / (m * m) * i1 - kB * g / m * i2;
}

}  // namespace

Rates rates(const CovarianceState& state, double q, double qdot, double T,
            const EngineParams& params) {
  (void)q;
  return {0.5 * qdot * state.sigma_x,
          params.gamma * (params.k_B * T / params.m - state.sigma_v)};
}

CyclePower cycle_power(const Trajectory& traj, const Protocol& protocol,
                       const TemperatureProfile& profile,
                       const EngineParams& params, double periodic_tol) {
  params.validate(profile);
  check_periodic(traj, periodic_tol);
  const double tf = profile.period();
  const double heat = heat_integral(traj, profile, params, 0.0, tf);
  const double work = work_side_total(traj, protocol, params);
  return {heat / tf, -work / tf};
}

CycleLedger cycle_ledger(const Trajectory& traj, const Protocol& protocol,
                         const TemperatureProfile& profile,
                         const EngineParams& params, double periodic_tol) {
  params.validate(profile);
  check_periodic(traj, periodic_tol);
  const double tf = profile.period();

  CycleLedger ledger;
  ledger.heat = heat_integral(traj, profile, params, 0.0, tf);
  // On a closed cycle the energy balance fixes W = -Q; the work-route
  // integral is exposed separately through cycle_power.
  ledger.work = -ledger.heat;
  ledger.power = ledger.heat / tf;
  if (const auto* r = std::get_if<ReducedTrajectory>(&traj)) {
    ledger.uptake = uptake_reduced_form(*r, profile, params);
  } else {
    ledger.uptake =
        uptake_entropy_route(std::get<FullTrajectory>(traj), profile, params);
  }
  ledger.dissipation = ledger.uptake + ledger.work;

  const double mean_T =
      profile.integrate([](double T) { return T; }, 0.0, tf) / tf;
  const double scale =
      params.gamma * params.k_B / params.m * mean_T * tf;  // heat scale
  const double noise = 1e-9 * scale;
  if (std::abs(ledger.uptake) <= noise && std::abs(ledger.work) <= noise) {
    // Quasi-static cycle: W and U both vanish; eta_U -> 1 in the limit.
    ledger.quasi_static = true;
    ledger.eta_U = 1.0;
  } else if (ledger.uptake <= 0.0) {
    ledger.non_positive_uptake = true;
    ledger.eta_U = std::numeric_limits<double>::quiet_NaN();
  } else {
    ledger.eta_U = -ledger.work / ledger.uptake;
  }

  if (profile.is_carnot()) {
    try {
      ledger.eta_Q = eta_q_carnot(traj, protocol, profile, params,
                                  periodic_tol);
    } catch (const Error&) {
      ledger.eta_Q = std::nullopt;
    }
  }
  return ledger;
}

double eta_q_carnot(const Trajectory& traj, const Protocol& protocol,
                    const TemperatureProfile& profile,
                    const EngineParams& params, double periodic_tol) {
  params.validate(profile);
  const double tf = profile.period();
  const double T_hot = profile.eval(0.0);
  const double T_cold = profile.eval(0.5 * tf);
  const bool two_level = profile.is_carnot() ||
                         (profile.segments().size() <= 2 &&
                          std::abs(T_hot - T_cold) <=
                              1e-9 * std::max(T_hot, 1.0) &&
                          profile.is_constant(1e-9));
  require(two_level, ErrorCode::NotCarnotProfile,
          "the hot bath is only identifiable for an equal-halves two-level "
          "profile");
  check_periodic(traj, periodic_tol);
  (void)protocol;

  const double heat = heat_integral(traj, profile, params, 0.0, tf);
  const double work = -heat;
  const double q_hot = heat_integral(traj, profile, params, 0.0, 0.5 * tf);
  const double scale =
      params.gamma * params.k_B / params.m * std::max(T_hot, 1.0) * tf;
  require(std::abs(work) > 1e-9 * scale && std::abs(q_hot) > 1e-9 * scale,
          ErrorCode::DegenerateCycle,
          "zero-work cycle: the classical efficiency is indeterminate");
  return -work / q_hot;
}

}  // namespace thermo
