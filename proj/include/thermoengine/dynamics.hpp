#pragma once

#include <array>
#include <variant>
#include <vector>

#include "thermoengine/synthesis.hpp"

namespace thermo {

/// Covariance of the Gaussian particle ensemble at one instant.
struct CovarianceState {
  double sigma_x;   // Var(X)
  double sigma_xv;  // Cov(X, v)
  double sigma_v;   // Var(v)

  bool is_positive_definite() const {
    return sigma_x > 0.0 && sigma_v > 0.0 &&
           sigma_x * sigma_v - sigma_xv * sigma_xv > 0.0;
  }
  double determinant() const {
    return sigma_x * sigma_v - sigma_xv * sigma_xv;
  }
};

/// Tolerances for the adaptive Dormand-Prince 5(4) stepper.
struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  long max_steps = 50'000'000;
};

namespace detail {

/// One accepted step with its continuous extension: a quartic polynomial in
/// theta = (t - t0)/h accurate to the local order of the pair.
template <int N>
struct DenseStep {
  double t0, t1;
  std::array<double, N> y0, y1;
  std::array<std::array<double, N>, 5> rcont;

  std::array<double, N> eval(double t) const {
    const double h = t1 - t0;
    const double th = (h > 0.0) ? (t - t0) / h : 0.0;
    const double th1 = 1.0 - th;
    std::array<double, N> out;
    for (int i = 0; i < N; ++i) {
      out[i] = rcont[0][i] +
               th * (rcont[1][i] +
                     th1 * (rcont[2][i] +
                            th * (rcont[3][i] + th1 * rcont[4][i])));
    }
    return out;
  }
};

template <int N>
class PiecewiseTrajectory {
 public:
  struct JumpNode {
    double t;
    std::array<double, N> left;
    std::array<double, N> right;
  };

  double t_begin() const { return steps_.empty() ? 0.0 : steps_.front().t0; }
  double t_end() const { return steps_.empty() ? 0.0 : steps_.back().t1; }

  /// State at t; at a jump node this is the right-limit, except at the very
  /// end of the trajectory where the post-jump state is returned by state_end.
  std::array<double, N> eval(double t) const;

  std::array<double, N> state_begin() const { return steps_.front().y0; }
  /// Final state including a terminal jump, if one was applied.
  std::array<double, N> state_end() const { return end_state_; }

  const std::vector<DenseStep<N>>& steps() const { return steps_; }
  const std::vector<JumpNode>& jumps() const { return jumps_; }

  void push_step(DenseStep<N> s) {
    steps_.push_back(std::move(s));
    end_state_ = steps_.back().y1;
  }
  void push_jump(double t, const std::array<double, N>& left,
                 const std::array<double, N>& right) {
    jumps_.push_back({t, left, right});
    end_state_ = right;
  }

 private:
  std::vector<DenseStep<N>> steps_;
  std::vector<JumpNode> jumps_;
  std::array<double, N> end_state_{};
};

}  // namespace detail

/// Reduced (low-friction) model trajectory: Sigma_v only, over one period,
/// with the terminal wrap jump already applied to state_end().
class ReducedTrajectory {
 public:
  detail::PiecewiseTrajectory<1> path;

  double sigma_v(double t) const { return path.eval(t)[0]; }
  double sigma_v_begin() const { return path.state_begin()[0]; }
  double sigma_v_end() const { return path.state_end()[0]; }
};

/// Full three-entry covariance trajectory over one period.
class FullTrajectory {
 public:
  detail::PiecewiseTrajectory<3> path;

  CovarianceState state(double t) const {
    const auto y = path.eval(t);
    return {y[0], y[1], y[2]};
  }
  CovarianceState state_begin() const {
    const auto y = path.state_begin();
    return {y[0], y[1], y[2]};
  }
  CovarianceState state_end() const {
    const auto y = path.state_end();
    return {y[0], y[1], y[2]};
  }
};

using Trajectory = std::variant<ReducedTrajectory, FullTrajectory>;

/// Integrate the reduced variance equation
///   dSigma_v/dt = Sigma_v (qdot/(2q) - gamma/m) + gamma k_B T / m^2
/// piecewise between jumps. Across a stiffness jump the distributional
/// qdot/(2q) term scales Sigma_v by sqrt(q+/q-); the same rule is applied at
/// the period wrap, so a periodic pair returns state_end == state_begin.
ReducedTrajectory integrate_reduced(const TemperatureProfile& profile,
                                    const Protocol& protocol,
                                    const EngineParams& params,
                                    double sigma_v0,
                                    const OdeOptions& opts = {});

/// Integrate the full covariance system
///   dSigma_x  = 2 Sigma_xv
///   dSigma_xv = Sigma_v - (q/m) Sigma_x - (gamma/m) Sigma_xv
///   dSigma_v  = -(2q/m) Sigma_xv - (2gamma/m) Sigma_v + 2 gamma k_B T/m^2.
/// The state is continuous across stiffness jumps (only the vector field
/// changes). Steps that leave the positive-definite cone are rejected and
/// halved; PositivityLoss is raised if that cannot be fixed.
FullTrajectory integrate_full(const TemperatureProfile& profile,
                              const Protocol& protocol,
                              const EngineParams& params,
                              const CovarianceState& state0,
                              const OdeOptions& opts = {});

enum class Model { Reduced, Full };

struct OrbitOptions {
  double orbit_tol = 1e-9;  // relative, max-norm over covariance entries
  int max_cycles = 10'000;
  OdeOptions ode;
};

struct OrbitResult {
  CovarianceState state0;  // for the reduced model only sigma_v is meaningful
  Trajectory trajectory;   // one final converged cycle
  int cycles = 0;          // one-period maps evaluated
  double residual = 0.0;
};

/// Locate the periodic steady state of the one-period map by fixed-point
/// iteration (the map is a contraction for gamma > 0), with 0.5-damped
/// iteration as a fallback when the residual stalls. The guess defaults to
/// the instantaneous-equilibrium state built from the mean temperature.
OrbitResult find_periodic_orbit(Model model, const TemperatureProfile& profile,
                                const Protocol& protocol,
                                const EngineParams& params,
                                const CovarianceState* guess = nullptr,
                                const OrbitOptions& opts = {});

}  // namespace thermo
