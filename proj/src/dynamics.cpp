#include "thermoengine/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "thermoengine/errors.hpp"

namespace thermo {
namespace {

// Dormand-Prince 5(4) coefficients with the standard quartic continuous
// extension (rcont1..rcont5 layout of Hairer's DOPRI5).
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

template <int N>
using Vec = std::array<double, N>;

template <int N, typename Rhs, typename Accept>
void integrate_segment(const Rhs& rhs, double t0, double t1, Vec<N>& y,
                       const OdeOptions& opts, const Accept& acceptable,
                       detail::PiecewiseTrajectory<N>* record, long& steps) {
  if (t1 <= t0) return;
  const double span = t1 - t0;
  double t = t0;
  Vec<N> k1 = rhs(t, y);
  double h = span / 100.0;

  while (t < t1) {
    if (t + h > t1) h = t1 - t;
    Vec<N> k2, k3, k4, k5, k6, k7, yt, y1;

    auto stage = [&](double c, auto&&... terms) {
      Vec<N> out;
      for (int i = 0; i < N; ++i) {
        double acc = y[i];
        ((acc += h * terms.first * terms.second[i]), ...);
        out[i] = acc;
      }
      (void)c;
      return out;
    };
    yt = stage(c2, std::pair{a21, k1});
    k2 = rhs(t + c2 * h, yt);
    yt = stage(c3, std::pair{a31, k1}, std::pair{a32, k2});
    k3 = rhs(t + c3 * h, yt);
    yt = stage(c4, std::pair{a41, k1}, std::pair{a42, k2}, std::pair{a43, k3});
    k4 = rhs(t + c4 * h, yt);
    yt = stage(c5, std::pair{a51, k1}, std::pair{a52, k2}, std::pair{a53, k3},
               std::pair{a54, k4});
    k5 = rhs(t + c5 * h, yt);
    yt = stage(1.0, std::pair{a61, k1}, std::pair{a62, k2}, std::pair{a63, k3},
               std::pair{a64, k4}, std::pair{a65, k5});
    k6 = rhs(t + h, yt);
    for (int i = 0; i < N; ++i)
      y1[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                          b6 * k6[i]);
    k7 = rhs(t + h, y1);

    double err = 0.0;
    for (int i = 0; i < N; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                             e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc =
          opts.abs_tol +
          opts.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / N);

    const bool ok = err <= 1.0 && acceptable(y1);
    if (ok) {
      if (record) {
        detail::DenseStep<N> st;
        st.t0 = t;
        st.t1 = t + h;
        st.y0 = y;
        st.y1 = y1;
        for (int i = 0; i < N; ++i) {
          const double ydiff = y1[i] - y[i];
          const double bspl = h * k1[i] - ydiff;
          st.rcont[0][i] = y[i];
          st.rcont[1][i] = ydiff;
          st.rcont[2][i] = bspl;
          st.rcont[3][i] = ydiff - h * k7[i] - bspl;
          st.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] +
                                d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        record->push_step(std::move(st));
      }
      t += h;
      y = y1;
      k1 = k7;  // FSAL
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      h *= std::clamp(fac, 0.2, 5.0);
    } else {
      h *= err > 1.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.5;
    }
    if (h < 1e-14 * span)
      fail(ErrorCode::StepFailure,
           "step size underflow; the protocol/profile pair is too stiff for "
           "the explicit stepper");
    if (++steps > opts.max_steps)
      fail(ErrorCode::StepFailure, "step budget exhausted");
  }
}

std::vector<double> merged_breakpoints(const TemperatureProfile& profile,
                                       const Protocol& protocol) {
  std::set<double> pts(profile.breakpoints().begin(),
                       profile.breakpoints().end());
  pts.insert(protocol.breakpoints().begin(), protocol.breakpoints().end());
  // Collapse near-duplicates.
  std::vector<double> out;
  const double tol = 1e-12 * profile.period();
  for (double p : pts) {
    if (out.empty() || p - out.back() > tol) out.push_back(p);
  }
  out.back() = profile.period();
  return out;
}

}  // namespace

ReducedTrajectory integrate_reduced(const TemperatureProfile& profile,
                                    const Protocol& protocol,
                                    const EngineParams& params,
                                    double sigma_v0, const OdeOptions& opts) {
  params.validate(profile);
  require(sigma_v0 > 0.0, ErrorCode::InvalidArgument,
          "initial Sigma_v must be positive");
  require(std::abs(protocol.period() - profile.period()) <=
              1e-12 * profile.period(),
          ErrorCode::InvalidArgument, "protocol/profile period mismatch");

  const double gm = params.gamma / params.m;
  const double drive = params.gamma * params.k_B / (params.m * params.m);
  const auto positive = [](const Vec<1>& y) { return y[0] > 0.0; };

  ReducedTrajectory traj;
  Vec<1> y{sigma_v0};
  long steps = 0;
  const auto breaks = merged_breakpoints(profile, protocol);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double t_ref = 0.5 * (breaks[i] + breaks[i + 1]);
    const auto rhs = [&, t_ref](double t, const Vec<1>& y) -> Vec<1> {
      return {y[0] * (0.5 * protocol.log_derivative_pinned(t, t_ref) - gm) +
              drive * profile.eval_pinned(t, t_ref)};
    };
    integrate_segment<1>(rhs, breaks[i], breaks[i + 1], y, opts, positive,
                         &traj.path, steps);
    // Distributional qdot/(2q) across the boundary: Sigma_v scales by
    // sqrt(q+/q-). At t_f the right limit is the wrapped q(0+).
    const double t_b = breaks[i + 1];
    const bool at_end = (i + 2 == breaks.size());
    const double ratio = (at_end ? protocol.q_start() : protocol.eval(t_b)) /
                         protocol.eval_left(t_b);
    if (std::abs(ratio - 1.0) > 1e-12) {
      const Vec<1> left = y;
      y[0] *= std::sqrt(ratio);
      traj.path.push_jump(t_b, left, y);
    }
  }
  return traj;
}

FullTrajectory integrate_full(const TemperatureProfile& profile,
                              const Protocol& protocol,
                              const EngineParams& params,
                              const CovarianceState& state0,
                              const OdeOptions& opts) {
  params.validate(profile);
  require(state0.is_positive_definite(), ErrorCode::InvalidArgument,
          "initial covariance must be positive definite");

  const double m = params.m;
  const double gm = params.gamma / m;
  const double drive = 2.0 * params.gamma * params.k_B / (m * m);
  const auto pd = [](const Vec<3>& y) {
    return y[0] > 0.0 && y[2] > 0.0 && y[0] * y[2] - y[1] * y[1] > 0.0;
  };

  FullTrajectory traj;
  Vec<3> y{state0.sigma_x, state0.sigma_xv, state0.sigma_v};
  long steps = 0;
  const auto breaks = merged_breakpoints(profile, protocol);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double t_ref = 0.5 * (breaks[i] + breaks[i + 1]);
    const auto rhs = [&, t_ref](double t, const Vec<3>& y) -> Vec<3> {
      const double q = protocol.eval_pinned(t, t_ref);
      return {2.0 * y[1],                       //
              y[2] - q / m * y[0] - gm * y[1],  //
              -2.0 * q / m * y[1] - 2.0 * gm * y[2] +
                  drive * profile.eval_pinned(t, t_ref)};
    };
    try {
      integrate_segment<3>(rhs, breaks[i], breaks[i + 1], y, opts, pd,
                           &traj.path, steps);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::StepFailure && !pd(y))
        fail(ErrorCode::PositivityLoss,
             "covariance positive-definiteness could not be maintained");
      throw;
    }
  }
  return traj;
}

namespace {

struct MapResult {
  Vec<3> state;
};

Vec<3> one_period_map(Model model, const TemperatureProfile& profile,
                      const Protocol& protocol, const EngineParams& params,
                      const Vec<3>& y0, const OdeOptions& ode) {
  if (model == Model::Reduced) {
    const auto traj = integrate_reduced(profile, protocol, params, y0[2], ode);
    return {0.0, 0.0, traj.sigma_v_end()};
  }
  const auto traj = integrate_full(
      profile, protocol, params, {y0[0], y0[1], y0[2]}, ode);
  const auto e = traj.state_end();
  return {e.sigma_x, e.sigma_xv, e.sigma_v};
}

double orbit_residual(Model model, const Vec<3>& a, const Vec<3>& b) {
  // Relative max-norm with a mixed scale for the correlation entry, which
  // passes through zero on the orbit.
  const double sx = std::max(std::abs(a[0]), std::abs(b[0]));
  const double sv = std::max(std::abs(a[2]), std::abs(b[2]));
  if (model == Model::Reduced) return std::abs(a[2] - b[2]) / sv;
  const double sxv = std::sqrt(sx * sv);
  return std::max({std::abs(a[0] - b[0]) / sx, std::abs(a[1] - b[1]) / sxv,
                   std::abs(a[2] - b[2]) / sv});
}

}  // namespace

OrbitResult find_periodic_orbit(Model model, const TemperatureProfile& profile,
                                const Protocol& protocol,
                                const EngineParams& params,
                                const CovarianceState* guess,
                                const OrbitOptions& opts) {
  params.validate(profile);
  const double tf = profile.period();
  const double mean_T =
      profile.integrate([](double T) { return T; }, 0.0, tf) / tf;
  Vec<3> y;
  if (guess != nullptr) {
    y = {guess->sigma_x, guess->sigma_xv, guess->sigma_v};
  } else {
    const double sv = params.k_B * mean_T / params.m;
    const double q_ref = protocol.eval(0.0);
    y = {params.k_B * mean_T / q_ref, 0.0, sv};
  }
  if (model == Model::Reduced && y[2] <= 0.0)
    fail(ErrorCode::InvalidArgument, "orbit guess must be positive");

  double prev_residual = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (int cycle = 1; cycle <= opts.max_cycles; ++cycle) {
    const Vec<3> y1 = one_period_map(model, profile, protocol, params, y,
                                     opts.ode);
    const double res = orbit_residual(model, y, y1);
    if (res <= opts.orbit_tol) {
      // Converged: one recording pass from the fixed point.
      OrbitResult out;
      out.cycles = cycle;
      out.residual = res;
      if (model == Model::Reduced) {
        auto traj =
            integrate_reduced(profile, protocol, params, y1[2], opts.ode);
        out.state0 = {0.0, 0.0, y1[2]};
        out.trajectory = std::move(traj);
      } else {
        auto traj = integrate_full(profile, protocol, params,
                                   {y1[0], y1[1], y1[2]}, opts.ode);
        out.state0 = {y1[0], y1[1], y1[2]};
        out.trajectory = std::move(traj);
      }
      return out;
    }
    // Damped fallback when the plain iteration stalls or oscillates.
    if (res >= prev_residual) {
      ++stalls;
    } else {
      stalls = 0;
    }
    if (stalls >= 2) {
      for (int i = 0; i < 3; ++i) y[i] = 0.5 * (y[i] + y1[i]);
    } else {
      y = y1;
    }
    prev_residual = res;
  }
  fail(ErrorCode::NoConvergence,
       "periodic orbit iteration exhausted max_cycles; gamma*t_f/m may be "
       "too small for practical convergence");
}

}  // namespace thermo

namespace thermo {
namespace detail {

template <int N>
std::array<double, N> PiecewiseTrajectory<N>::eval(double t) const {
  require(!steps_.empty(), ErrorCode::InvalidArgument, "empty trajectory");
  if (t >= steps_.back().t1) return end_state_;
  if (t <= steps_.front().t0) return steps_.front().y0;
  // Right-limit at interior jumps: find the first step with t < t1.
  auto it = std::upper_bound(
      steps_.begin(), steps_.end(), t,
      [](double v, const DenseStep<N>& s) { return v < s.t1; });
  return it->eval(t);
}

template struct DenseStep<1>;
template struct DenseStep<3>;
template class PiecewiseTrajectory<1>;
template class PiecewiseTrajectory<3>;

}  // namespace detail
}  // namespace thermo
