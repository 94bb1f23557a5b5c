#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "thermoengine/profiles.hpp"

namespace thermo {

/// Physical constants of the engine. k_B defaults to 1 in reduced units.
struct EngineParams {
  double m;      // particle mass
  double gamma;  // viscosity coefficient
  double k_B = 1.0;
  double t_f;    // cycle period
  double q0;     // reference stiffness q(0+)

  double kappa() const { return m / (gamma * k_B); }

  /// q0 giving gamma / sqrt(m q0) = ratio (default 1e-2, comfortably inside
  /// the low-friction regime).
  static double default_q0(double m, double gamma, double ratio = 1e-2);

  /// Positivity checks plus period consistency with the profile.
  void validate(const TemperatureProfile& profile) const;
};

// ---------------------------------------------------------------------------
// Protocol: the time course of the trap stiffness q(t)
// ---------------------------------------------------------------------------

namespace protocol_piece {

struct ConstantQ {
  double q;
};

/// q(t) = q0 * (T(t)/T(0+)) * exp(c1*t - c2*R(t)), R(t) = int_0^t sqrt(T),
/// with c1 = 2 gamma/m and c2 = c1 * t_f / R(t_f). Drives the reduced
/// dynamics along Sigma_v proportional to sqrt(T) and is periodic by
/// construction.
struct MaxPowerForm {
  ProfilePtr profile;
  std::shared_ptr<const CumulativeIntegral> sqrtT_cum;
  double q0;
  double T_at_0;
  double c1;
  double c2;
};

/// q(t) = q0 * (T^2 + mu T)/(T0^2 + mu T0) * exp(2 gamma (t - r(t))/m) with
/// r(t) = r_coef * int_0^t sqrt(T)/sqrt(T + mu). Periodicity is equivalent
/// to r(t_f) = t_f, which is how the multiplier mu is fixed.
struct FixedPowerForm {
  ProfilePtr profile;
  std::shared_ptr<const CumulativeIntegral> ratio_cum;  // int sqrt(T/(T+mu))
  double q0;
  double mu;
  double denom0;  // T(0)^2 + mu T(0)
  double c1;      // 2 gamma / m
  double r_coef;
};

/// q(t) = q0 * (1 + a cos(omega t + phase)): the small-amplitude comparator
/// protocol for a single-sinusoid temperature profile.
struct LinearResponseForm {
  double q0;
  double a;
  double omega;
  double phase;
};

using Shape = std::variant<ConstantQ, MaxPowerForm, FixedPowerForm,
                           LinearResponseForm>;

struct Piece {
  double t0;
  double t1;
  Shape shape;
};

}  // namespace protocol_piece

/// Periodic stiffness protocol over one cycle. q(t) > 0 everywhere,
/// q(0+) = q(t_f+), weakly differentiable inside pieces; jumps are explicit.
/// Immutable and shareable across threads.
class Protocol {
 public:
  Protocol(double period, std::vector<protocol_piece::Piece> pieces);

  static Protocol constant(double q, double period);

  double period() const { return period_; }

  /// q at the periodic extension of t; right-limit at jumps.
  double eval(double t) const;

  /// Left-limit q(t-), with q(0-) = q(t_f-).
  double eval_left(double t) const;

  /// d(log q)/dt inside the smooth piece containing t.
  double log_derivative(double t) const;

  /// dq/dt inside the smooth piece containing t.
  double derivative(double t) const { return eval(t) * log_derivative(t); }

  /// Smooth extension of the piece containing t_ref, evaluated at t (see
  /// TemperatureProfile::eval_pinned).
  double eval_pinned(double t, double t_ref) const;
  double log_derivative_pinned(double t, double t_ref) const;

  double q_start() const { return eval(0.0); }       // q(0+)
  double q_end_left() const;                         // q(t_f-)

  /// Interior jump locations in (0, t_f).
  const std::vector<double>& jump_times() const { return jumps_; }

  bool has_wrap_jump() const { return wrap_jump_; }

  /// Piece boundaries in [0, t_f] including both endpoints.
  const std::vector<double>& breakpoints() const { return breaks_; }

  /// Smallest stiffness over the cycle (sampled; used for step-size bounds
  /// and regime diagnostics, not for exact math).
  double min_q() const { return q_min_; }
  double max_q() const { return q_max_; }

 private:
  const protocol_piece::Piece& piece_at(double t_wrapped) const;

  double period_;
  std::vector<protocol_piece::Piece> pieces_;
  std::vector<double> jumps_;
  std::vector<double> breaks_;
  bool wrap_jump_ = false;
  double q_min_ = 0.0;
  double q_max_ = 0.0;
};

// ---------------------------------------------------------------------------
// SigmaTrajectory: the velocity-variance trajectory of the reduced model
// ---------------------------------------------------------------------------

namespace sigma_form {

/// Sigma_v(t) = coef * sqrt(T(t)), coef = (k_B/m) * mean sqrt(T).
struct MaxPower {
  double coef;
};

/// Sigma_v(t) = inv_sqrt_lambda * sqrt(T^2 + mu T).
struct FixedPower {
  double mu;
  double inv_sqrt_lambda;
};

/// Arbitrary tabulated Sigma_v (e.g. measured from the integrator).
struct Numeric {
  std::shared_ptr<const std::function<double(double)>> fn;
};

using Form = std::variant<MaxPower, FixedPower, Numeric>;

}  // namespace sigma_form

/// Evaluable, strictly positive, periodic Sigma_v(t) together with the
/// functional form it came from.
class SigmaTrajectory {
 public:
  SigmaTrajectory(ProfilePtr profile, sigma_form::Form form);

  double eval(double t) const;
  double period() const;
  const sigma_form::Form& form() const { return form_; }

  /// Multiplier mu when the form is FixedPower.
  std::optional<double> mu() const;

  const TemperatureProfile& profile() const { return *profile_; }

 private:
  ProfilePtr profile_;
  sigma_form::Form form_;
};

// ---------------------------------------------------------------------------
// Synthesis operations
// ---------------------------------------------------------------------------

/// Velocity-variance trajectory drawing maximum power:
/// Sigma_v(t) = (k_B/(m t_f)) (int_0^{t_f} sqrt(T)) sqrt(T(t)).
SigmaTrajectory max_power_sigma(const ProfilePtr& profile,
                                const EngineParams& params);

/// P* = (gamma k_B / m) Var(sqrt T).
double max_power_value(const TemperatureProfile& profile,
                       const EngineParams& params);

/// Stiffness protocol realizing max_power_sigma in the reduced dynamics.
Protocol max_power_protocol(const ProfilePtr& profile,
                            const EngineParams& params);

/// Lagrange multiplier mu >= 0 for power P in [0, P*), from
///   int sqrt(T^2+mu T) * int sqrt(T)/sqrt(T+mu) = t_f int T - t_f^2 m P/(gamma k_B),
/// by geometric bracket expansion and bisection to 1e-12 relative.
/// Throws PowerOutOfRange / BracketFailure.
double solve_mu(const TemperatureProfile& profile, const EngineParams& params,
                double power);

/// Sigma_v(t) = sqrt(T^2 + mu T) / sqrt(lambda) minimizing dissipation at
/// power P; satisfies both the log-periodicity constraint and the power
/// constraint by construction.
SigmaTrajectory fixed_power_sigma(const ProfilePtr& profile,
                                  const EngineParams& params, double power);

/// Protocol realizing fixed_power_sigma; continuous wherever T is.
Protocol fixed_power_protocol(const ProfilePtr& profile,
                              const EngineParams& params, double power);

/// Maximum efficiency eta_U attainable at power P. Returns 1 at P = 0 and
/// routes P = P* to efficiency_at_max_power.
double max_efficiency_at_power(const TemperatureProfile& profile,
                               const EngineParams& params, double power);

/// Efficiency at maximum power. Evaluates both the moment-ratio form
///   mean_sqrtT * Var(sqrtT) / (mean_T32 - mean_T * mean_sqrtT)
/// and the skewness form 1 / (2 + mu3 / (Var * mean_sqrtT)) and checks the
/// two agree to 1e-10 before returning. Throws DegenerateProfile for
/// constant profiles.
double efficiency_at_max_power(const TemperatureProfile& profile);

/// q(t) = q0 (1 + (dT/Tbar) cos(omega t + phase)) for a profile consisting
/// of a single sinusoid piece.
Protocol linear_response_protocol(const TemperatureProfile& profile,
                                  const EngineParams& params);

/// Drive-vs-natural-frequency diagnostic (2 pi / t_f) * sqrt(m / min q).
/// The analysis assumes this is well below 1; it is reported, not enforced.
double frequency_ratio_diagnostic(const Protocol& protocol,
                                  const EngineParams& params);

}  // namespace thermo
