#include "thermoengine/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "thermoengine/errors.hpp"

namespace thermo {

double EngineParams::default_q0(double m, double gamma, double ratio) {
  return (gamma / ratio) * (gamma / ratio) / m;
}

void EngineParams::validate(const TemperatureProfile& profile) const {
  require(m > 0.0 && gamma > 0.0 && k_B > 0.0 && t_f > 0.0 && q0 > 0.0,
          ErrorCode::InvalidArgument,
          "engine parameters must all be strictly positive");
  require(std::abs(t_f - profile.period()) <= 1e-12 * t_f,
          ErrorCode::InvalidArgument,
          "params.t_f does not match the profile period");
}

// ---------------------------------------------------------------------------
// Protocol
// ---------------------------------------------------------------------------

namespace {

using protocol_piece::ConstantQ;
using protocol_piece::FixedPowerForm;
using protocol_piece::LinearResponseForm;
using protocol_piece::MaxPowerForm;
using protocol_piece::Piece;

// Shape evaluation pins the profile lookup to t_ref (an interior point of
// the piece) so that the piece's own smooth extension is used at both of its
// endpoints, even when the profile jumps there.
double shape_eval(const protocol_piece::Shape& s, double t, double t_ref) {
  return std::visit(
      [t, t_ref](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantQ>) {
          (void)t;
          return p.q;
        } else if constexpr (std::is_same_v<P, MaxPowerForm>) {
          const double T = p.profile->eval_pinned(t, t_ref);
          return p.q0 * (T / p.T_at_0) *
                 std::exp(p.c1 * t - p.c2 * p.sqrtT_cum->value(t));
        } else if constexpr (std::is_same_v<P, FixedPowerForm>) {
          const double T = p.profile->eval_pinned(t, t_ref);
          const double r = p.r_coef * p.ratio_cum->value(t);
          return p.q0 * (T * T + p.mu * T) / p.denom0 *
                 std::exp(p.c1 * (t - r));
        } else {
          return p.q0 * (1.0 + p.a * std::cos(p.omega * t + p.phase));
        }
      },
      s);
}

double shape_log_derivative(const protocol_piece::Shape& s, double t,
                            double t_ref) {
  return std::visit(
      [t, t_ref](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantQ>) {
          (void)t;
          return 0.0;
        } else if constexpr (std::is_same_v<P, MaxPowerForm>) {
          const double T = p.profile->eval_pinned(t, t_ref);
          const double Td = p.profile->derivative_pinned(t, t_ref);
          return Td / T + p.c1 - p.c2 * std::sqrt(T);
        } else if constexpr (std::is_same_v<P, FixedPowerForm>) {
          const double T = p.profile->eval_pinned(t, t_ref);
          const double Td = p.profile->derivative_pinned(t, t_ref);
          const double rdot =
              p.r_coef * std::sqrt(T) / std::sqrt(T + p.mu);
          return Td * (2.0 * T + p.mu) / (T * T + p.mu * T) +
                 p.c1 * (1.0 - rdot);
        } else {
          const double c = std::cos(p.omega * t + p.phase);
          return -p.a * p.omega * std::sin(p.omega * t + p.phase) /
                 (1.0 + p.a * c);
        }
      },
      s);
}

double piece_mid(const Piece& p) { return 0.5 * (p.t0 + p.t1); }

}  // namespace

Protocol::Protocol(double period, std::vector<protocol_piece::Piece> pieces)
    : period_(period), pieces_(std::move(pieces)) {
  require(period_ > 0.0, ErrorCode::InvalidArgument,
          "protocol period must be positive");
  require(!pieces_.empty(), ErrorCode::InvalidArgument,
          "protocol needs at least one piece");
  std::sort(pieces_.begin(), pieces_.end(),
            [](const Piece& a, const Piece& b) { return a.t0 < b.t0; });
  const double tol = 1e-12 * period_;
  require(std::abs(pieces_.front().t0) <= tol &&
              std::abs(pieces_.back().t1 - period_) <= tol,
          ErrorCode::InvalidArgument, "protocol pieces must tile [0, period)");
  pieces_.front().t0 = 0.0;
  pieces_.back().t1 = period_;
  breaks_.push_back(0.0);
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    require(pieces_[i].t1 > pieces_[i].t0, ErrorCode::InvalidArgument,
            "protocol piece has non-positive duration");
    if (i + 1 < pieces_.size()) {
      require(std::abs(pieces_[i].t1 - pieces_[i + 1].t0) <= tol,
              ErrorCode::InvalidArgument,
              "protocol pieces must tile [0, period)");
      pieces_[i + 1].t0 = pieces_[i].t1;
    }
    breaks_.push_back(pieces_[i].t1);
  }

  // Jumps and positive range, sampling each piece plus its end limits.
  q_min_ = std::numeric_limits<double>::infinity();
  q_max_ = 0.0;
  for (const auto& p : pieces_) {
    constexpr int kSamples = 257;
    for (int i = 0; i < kSamples; ++i) {
      const double t = p.t0 + (p.t1 - p.t0) * i / (kSamples - 1.0);
      const double q = shape_eval(p.shape, t, piece_mid(p));
      require(q > 0.0 && std::isfinite(q), ErrorCode::InvalidArgument,
              "protocol stiffness must stay strictly positive");
      q_min_ = std::min(q_min_, q);
      q_max_ = std::max(q_max_, q);
    }
  }
  const double jump_tol = 1e-10;
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    const double left =
        shape_eval(pieces_[i].shape, pieces_[i].t1, piece_mid(pieces_[i]));
    const double right = shape_eval(pieces_[i + 1].shape, pieces_[i + 1].t0,
                                    piece_mid(pieces_[i + 1]));
    if (std::abs(left / right - 1.0) > jump_tol)
      jumps_.push_back(pieces_[i].t1);
  }
  const double wrap_left =
      shape_eval(pieces_.back().shape, period_, piece_mid(pieces_.back()));
  const double wrap_right =
      shape_eval(pieces_.front().shape, 0.0, piece_mid(pieces_.front()));
  wrap_jump_ = std::abs(wrap_left / wrap_right - 1.0) > jump_tol;
}

Protocol Protocol::constant(double q, double period) {
  return Protocol(period, {{0.0, period, ConstantQ{q}}});
}

const protocol_piece::Piece& Protocol::piece_at(double t) const {
  auto it = std::upper_bound(
      pieces_.begin(), pieces_.end(), t,
      [](double v, const Piece& p) { return v < p.t1; });
  if (it == pieces_.end()) --it;
  return *it;
}

namespace {
double wrap_time(double t, double period) {
  double w = std::fmod(t, period);
  if (w < 0.0) w += period;
  return w;
}
}  // namespace

double Protocol::eval(double t) const {
  const double w = wrap_time(t, period_);
  const auto& p = piece_at(w);
  return shape_eval(p.shape, w, piece_mid(p));
}

double Protocol::eval_left(double t) const {
  double w = wrap_time(t, period_);
  if (w == 0.0) w = period_;
  auto it = std::upper_bound(
      pieces_.begin(), pieces_.end(), w,
      [](double v, const Piece& p) { return v <= p.t1; });
  if (it == pieces_.end()) --it;
  return shape_eval(it->shape, w, piece_mid(*it));
}

double Protocol::log_derivative(double t) const {
  const double w = wrap_time(t, period_);
  const auto& p = piece_at(w);
  return shape_log_derivative(p.shape, w, piece_mid(p));
}

double Protocol::eval_pinned(double t, double t_ref) const {
  const auto& p = piece_at(wrap_time(t_ref, period_));
  return shape_eval(p.shape, t, piece_mid(p));
}

double Protocol::log_derivative_pinned(double t, double t_ref) const {
  const auto& p = piece_at(wrap_time(t_ref, period_));
  return shape_log_derivative(p.shape, t, piece_mid(p));
}

double Protocol::q_end_left() const {
  return shape_eval(pieces_.back().shape, period_, piece_mid(pieces_.back()));
}

// ---------------------------------------------------------------------------
// SigmaTrajectory
// ---------------------------------------------------------------------------

SigmaTrajectory::SigmaTrajectory(ProfilePtr profile, sigma_form::Form form)
    : profile_(std::move(profile)), form_(std::move(form)) {
  require(profile_ != nullptr, ErrorCode::InvalidArgument,
          "sigma trajectory needs a profile");
}

double SigmaTrajectory::eval(double t) const {
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, sigma_form::MaxPower>) {
          return f.coef * std::sqrt(profile_->eval(t));
        } else if constexpr (std::is_same_v<F, sigma_form::FixedPower>) {
          const double T = profile_->eval(t);
          return f.inv_sqrt_lambda * std::sqrt(T * T + f.mu * T);
        } else {
          return (*f.fn)(t);
        }
      },
      form_);
}

double SigmaTrajectory::period() const { return profile_->period(); }

std::optional<double> SigmaTrajectory::mu() const {
  if (const auto* fp = std::get_if<sigma_form::FixedPower>(&form_))
    return fp->mu;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

SigmaTrajectory max_power_sigma(const ProfilePtr& profile,
                                const EngineParams& params) {
  params.validate(*profile);
  const double int_sqrtT =
      profile->integrate([](double T) { return std::sqrt(T); }, 0.0,
                         profile->period());
  const double coef = params.k_B / (params.m * params.t_f) * int_sqrtT;
  return SigmaTrajectory(profile, sigma_form::MaxPower{coef});
}

double max_power_value(const TemperatureProfile& profile,
                       const EngineParams& params) {
  params.validate(profile);
  return params.gamma * params.k_B / params.m * profile.moments().var_sqrtT;
}

Protocol max_power_protocol(const ProfilePtr& profile,
                            const EngineParams& params) {
  params.validate(*profile);
  auto cum = std::make_shared<CumulativeIntegral>(
      profile->cumulative([](double T) { return std::sqrt(T); }));
  const double c1 = 2.0 * params.gamma / params.m;
  const double c2 = c1 * params.t_f / cum->total();
  MaxPowerForm form{profile, cum, params.q0, profile->eval(0.0), c1, c2};
  std::vector<Piece> pieces;
  const auto& breaks = profile->breakpoints();
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    pieces.push_back({breaks[i], breaks[i + 1], form});
  return Protocol(profile->period(), std::move(pieces));
}

namespace {

struct MuEquation {
  const TemperatureProfile& profile;
  double rhs;

  // LHS(mu) = int sqrt(T^2 + mu T) * int sqrt(T) / sqrt(T + mu).
  double lhs(double mu) const {
    const double tf = profile.period();
    const double A = profile.integrate(
        [mu](double T) { return std::sqrt(T * (T + mu)); }, 0.0, tf);
    const double B = profile.integrate(
        [mu](double T) { return std::sqrt(T / (T + mu)); }, 0.0, tf);
    return A * B;
  }

  double residual(double mu) const { return lhs(mu) - rhs; }
};

}  // namespace

double solve_mu(const TemperatureProfile& profile, const EngineParams& params,
                double power) {
  params.validate(profile);
  if (power == 0.0) return 0.0;  // quasi-static branch, any profile
  const double p_star = max_power_value(profile, params);
  require(power > 0.0 && power < p_star, ErrorCode::PowerOutOfRange,
          "power must lie in [0, P*)");

  const double tf = profile.period();
  const double int_T =
      profile.integrate([](double T) { return T; }, 0.0, tf);
  const double rhs =
      tf * int_T - tf * tf * params.m / (params.gamma * params.k_B) * power;
  MuEquation eq{profile, rhs};

  // residual(0) = tf^2 kappa P > 0 and residual -> (int sqrtT)^2 - rhs < 0
  // as mu -> inf, so a sign change exists on the branch mu >= 0.
  const double mean_T = int_T / tf;
  double lo = 0.0;
  double hi = mean_T;
  const double mu_cap = 1e15 * mean_T;
  while (eq.residual(hi) > 0.0) {
    lo = hi;
    hi *= 10.0;
    if (hi > mu_cap)
      fail(ErrorCode::BracketFailure,
           "no sign change for the multiplier equation below 1e15 * mean_T");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eq.residual(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-12 * hi) break;
  }
  return 0.5 * (lo + hi);
}

namespace {

struct FixedPowerPlan {
  double mu;
  double inv_sqrt_lambda;
  double r_coef;
};

FixedPowerPlan plan_fixed_power(const TemperatureProfile& profile,
                                const EngineParams& params, double power) {
  const double mu = solve_mu(profile, params, power);
  const double tf = profile.period();
  const double int_T = profile.integrate([](double T) { return T; }, 0.0, tf);
  const double int_A = profile.integrate(
      [mu](double T) { return std::sqrt(T * (T + mu)); }, 0.0, tf);
  const double sqrt_lambda =
      int_A / (params.k_B / params.m * int_T - tf / params.gamma * power);
  const double r_coef =
      int_A / (int_T - tf * params.m / (params.gamma * params.k_B) * power);
  return {mu, 1.0 / sqrt_lambda, r_coef};
}

}  // namespace

SigmaTrajectory fixed_power_sigma(const ProfilePtr& profile,
                                  const EngineParams& params, double power) {
  params.validate(*profile);
  const auto plan = plan_fixed_power(*profile, params, power);
  return SigmaTrajectory(profile,
                         sigma_form::FixedPower{plan.mu, plan.inv_sqrt_lambda});
}

Protocol fixed_power_protocol(const ProfilePtr& profile,
                              const EngineParams& params, double power) {
  params.validate(*profile);
  const auto plan = plan_fixed_power(*profile, params, power);
  const double mu = plan.mu;
  auto cum = std::make_shared<CumulativeIntegral>(profile->cumulative(
      [mu](double T) { return std::sqrt(T / (T + mu)); }));
  const double T0 = profile->eval(0.0);
  FixedPowerForm form{profile,
                      cum,
                      params.q0,
                      mu,
                      T0 * T0 + mu * T0,
                      2.0 * params.gamma / params.m,
                      plan.r_coef};
  std::vector<Piece> pieces;
  const auto& breaks = profile->breakpoints();
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    pieces.push_back({breaks[i], breaks[i + 1], form});
  return Protocol(profile->period(), std::move(pieces));
}

double max_efficiency_at_power(const TemperatureProfile& profile,
                               const EngineParams& params, double power) {
  params.validate(profile);
  if (power == 0.0) return 1.0;  // quasi-static limit, zero dissipation
  const double p_star = max_power_value(profile, params);
  // The endpoint is routed to the closed-form limit; compare with a small
  // tolerance since p_star itself carries quadrature rounding.
  if (power >= p_star * (1.0 - 1e-12))
    require(power <= p_star * (1.0 + 1e-12), ErrorCode::PowerOutOfRange,
            "power must lie in [0, P*]");
  if (power >= p_star * (1.0 - 1e-12))
    return efficiency_at_max_power(profile);
  require(power > 0.0, ErrorCode::PowerOutOfRange,
          "power must lie in [0, P*]");

  const double mu = solve_mu(profile, params, power);
  const double tf = profile.period();
  const double kappa = params.kappa();
  const double mean_T =
      profile.integrate([](double T) { return T; }, 0.0, tf) / tf;
  const double mean_A = profile.integrate(
                            [mu](double T) { return std::sqrt(T * (T + mu)); },
                            0.0, tf) /
                        tf;
  const double mean_C =
      profile.integrate(
          [mu](double T) { return T * std::sqrt(T) / std::sqrt(T + mu); }, 0.0,
          tf) /
      tf;
  const double denom = mean_A / (mean_T - kappa * power) * mean_C - mean_T;
  return kappa * power / denom;
}

double efficiency_at_max_power(const TemperatureProfile& profile) {
  const ProfileMoments m = profile.moments();
  const double scale = std::max(m.mean_T, 1e-300);
  require(m.var_sqrtT > profile.quad().rel_tol * scale,
          ErrorCode::DegenerateProfile,
          "Var(sqrt T) is at quadrature noise level; efficiency at maximum "
          "power is undefined for a constant profile");
  // Both the moment-ratio and the skewness form, with the denominator
  // mean_T32 - mean_T * mean_sqrtT taken through the centered covariance.
  const double eta_ratio =
      m.mean_sqrtT * m.var_sqrtT / profile.cov_sqrtT_T();
  const double eta_skew =
      1.0 / (2.0 + m.mu3_sqrtT / (m.var_sqrtT * m.mean_sqrtT));
  require(std::abs(eta_ratio - eta_skew) <= 1e-10 * std::abs(eta_ratio),
          ErrorCode::NonConvergent,
          "moment-ratio and skewness forms of the efficiency disagree");
  return eta_ratio;
}

Protocol linear_response_protocol(const TemperatureProfile& profile,
                                  const EngineParams& params) {
  params.validate(profile);
  require(profile.segments().size() == 1, ErrorCode::InvalidArgument,
          "linear-response protocol needs a single-piece sinusoid profile");
  const auto* sin = std::get_if<SinusoidPiece>(&profile.segments()[0].shape);
  require(sin != nullptr, ErrorCode::InvalidArgument,
          "linear-response protocol needs a sinusoid profile");
  LinearResponseForm form{params.q0, sin->amp / sin->mean, sin->omega,
                          sin->phase};
  return Protocol(profile.period(), {{0.0, profile.period(), form}});
}

double frequency_ratio_diagnostic(const Protocol& protocol,
                                  const EngineParams& params) {
  const double drive = 2.0 * M_PI / protocol.period();
  return drive * std::sqrt(params.m / protocol.min_q());
}

}  // namespace thermo
