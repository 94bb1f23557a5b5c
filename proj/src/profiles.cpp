#include "thermoengine/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "thermoengine/errors.hpp"

namespace thermo {

namespace piece {

double eval(const PieceShape& s, double t) {
  return std::visit(
      [t](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantPiece>) {
          (void)t;
          return p.value;
        } else if constexpr (std::is_same_v<P, SinusoidPiece>) {
          return p.mean + p.amp * std::cos(p.omega * t + p.phase);
        } else {
          return 0.0;  // LinearPiece handled by caller (needs interval)
        }
      },
      s);
}

double derivative(const PieceShape& s, double t) {
  return std::visit(
      [t](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantPiece>) {
          (void)t;
          return 0.0;
        } else if constexpr (std::is_same_v<P, SinusoidPiece>) {
          return -p.amp * p.omega * std::sin(p.omega * t + p.phase);
        } else {
          return 0.0;
        }
      },
      s);
}

namespace {

double linear_eval(const LinearPiece& p, double t0, double t1, double t) {
  if (t1 == t0) return p.T_start;
  const double u = (t - t0) / (t1 - t0);
  return p.T_start + (p.T_end - p.T_start) * u;
}

}  // namespace

double min_on(const PieceShape& s, double t0, double t1) {
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantPiece>) {
          return p.value;
        } else if constexpr (std::is_same_v<P, SinusoidPiece>) {
          double lo = std::min(eval(s, t0), eval(s, t1));
          if (p.omega != 0.0) {
            // Interior critical points at omega*t + phase = k*pi.
            const double k0 = std::ceil((p.omega * t0 + p.phase) / M_PI);
            const double k1 = std::floor((p.omega * t1 + p.phase) / M_PI);
            for (double k = k0; k <= k1; k += 1.0)
              lo = std::min(lo, eval(s, (k * M_PI - p.phase) / p.omega));
          }
          return lo;
        } else {
          return std::min(linear_eval(p, t0, t1, t0),
                          linear_eval(p, t0, t1, t1));
        }
      },
      s);
}

double max_on(const PieceShape& s, double t0, double t1) {
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantPiece>) {
          return p.value;
        } else if constexpr (std::is_same_v<P, SinusoidPiece>) {
          double hi = std::max(eval(s, t0), eval(s, t1));
          if (p.omega != 0.0) {
            const double k0 = std::ceil((p.omega * t0 + p.phase) / M_PI);
            const double k1 = std::floor((p.omega * t1 + p.phase) / M_PI);
            for (double k = k0; k <= k1; k += 1.0)
              hi = std::max(hi, eval(s, (k * M_PI - p.phase) / p.omega));
          }
          return hi;
        } else {
          return std::max(linear_eval(p, t0, t1, t0),
                          linear_eval(p, t0, t1, t1));
        }
      },
      s);
}

}  // namespace piece

namespace {

double segment_eval(const ProfileSegment& s, double t) {
  if (const auto* lin = std::get_if<LinearPiece>(&s.shape)) {
    const double u = (t - s.t0) / (s.t1 - s.t0);
    return lin->T_start + (lin->T_end - lin->T_start) * u;
  }
  return piece::eval(s.shape, t);
}

double segment_derivative(const ProfileSegment& s, double t) {
  if (const auto* lin = std::get_if<LinearPiece>(&s.shape)) {
    return (lin->T_end - lin->T_start) / (s.t1 - s.t0);
  }
  return piece::derivative(s.shape, t);
}

}  // namespace

TemperatureProfile::TemperatureProfile(double period,
                                       std::vector<ProfileSegment> segments,
                                       QuadOptions quad)
    : period_(period), segments_(std::move(segments)), quad_(quad) {
  require(period_ > 0.0 && std::isfinite(period_), ErrorCode::InvalidArgument,
          "profile period must be positive");
  require(!segments_.empty(), ErrorCode::InvalidArgument,
          "profile needs at least one piece");
  std::sort(segments_.begin(), segments_.end(),
            [](const ProfileSegment& a, const ProfileSegment& b) {
              return a.t0 < b.t0;
            });
  const double tol = 1e-12 * period_;
  require(std::abs(segments_.front().t0) <= tol, ErrorCode::InvalidArgument,
          "pieces must start at t = 0");
  require(std::abs(segments_.back().t1 - period_) <= tol,
          ErrorCode::InvalidArgument, "pieces must end at t = period");
  segments_.front().t0 = 0.0;
  segments_.back().t1 = period_;
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    require(std::abs(segments_[i].t1 - segments_[i + 1].t0) <= tol,
            ErrorCode::InvalidArgument, "pieces must tile [0, period) exactly");
    // Snap shared edges so lookup never falls in a gap.
    segments_[i + 1].t0 = segments_[i].t1;
  }

  T_min_ = std::numeric_limits<double>::infinity();
  T_max_ = -std::numeric_limits<double>::infinity();
  breaks_.push_back(0.0);
  for (const auto& s : segments_) {
    require(s.t1 > s.t0, ErrorCode::InvalidArgument,
            "piece has non-positive duration");
    T_min_ = std::min(T_min_, piece::min_on(s.shape, s.t0, s.t1));
    T_max_ = std::max(T_max_, piece::max_on(s.shape, s.t0, s.t1));
    breaks_.push_back(s.t1);
  }
  require(T_min_ > 0.0, ErrorCode::InvalidArgument,
          "temperature must stay strictly positive");

  // Interior jumps: left limit of piece i vs right limit of piece i+1.
  const double jump_tol = 1e-12 * std::max(1.0, T_max_);
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    const double left = segment_eval(segments_[i], segments_[i].t1);
    const double right = segment_eval(segments_[i + 1], segments_[i + 1].t0);
    if (std::abs(left - right) > jump_tol) jumps_.push_back(segments_[i].t1);
  }
  const double wrap_left = segment_eval(segments_.back(), period_);
  const double wrap_right = segment_eval(segments_.front(), 0.0);
  wrap_jump_ = std::abs(wrap_left - wrap_right) > jump_tol;
}

TemperatureProfile TemperatureProfile::constant(double T, double period) {
  return TemperatureProfile(period, {{0.0, period, ConstantPiece{T}}});
}

TemperatureProfile TemperatureProfile::sinusoid(double T_mean, double T_amp,
                                                double period, double phase) {
  const double omega = 2.0 * M_PI / period;
  return TemperatureProfile(
      period, {{0.0, period, SinusoidPiece{T_mean, T_amp, omega, phase}}});
}

TemperatureProfile TemperatureProfile::two_level(double T_hot, double T_cold,
                                                 double period,
                                                 double hot_fraction) {
  require(hot_fraction > 0.0 && hot_fraction < 1.0, ErrorCode::InvalidArgument,
          "hot_fraction must lie in (0, 1)");
  const double ts = hot_fraction * period;
  return TemperatureProfile(period, {{0.0, ts, ConstantPiece{T_hot}},
                                     {ts, period, ConstantPiece{T_cold}}});
}

TemperatureProfile TemperatureProfile::carnot(double T_hot, double T_cold,
                                              double period) {
  return two_level(T_hot, T_cold, period, 0.5);
}

TemperatureProfile TemperatureProfile::sampled(
    const std::vector<std::pair<double, double>>& knots, double period) {
  require(knots.size() >= 2, ErrorCode::InvalidArgument,
          "sampled profile needs at least two knots");
  std::vector<ProfileSegment> segs;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    segs.push_back({knots[i].first, knots[i + 1].first,
                    LinearPiece{knots[i].second, knots[i + 1].second}});
  }
  return TemperatureProfile(period, std::move(segs));
}

const ProfileSegment& TemperatureProfile::segment_at(double t) const {
  // t is wrapped to [0, period). Right-limit convention: the piece whose
  // [t0, t1) contains t.
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](double v, const ProfileSegment& s) { return v < s.t1; });
  if (it == segments_.end()) --it;
  return *it;
}

namespace {
double wrap_time(double t, double period) {
  double w = std::fmod(t, period);
  if (w < 0.0) w += period;
  return w;
}
}  // namespace

double TemperatureProfile::eval(double t) const {
  const double w = wrap_time(t, period_);
  return segment_eval(segment_at(w), w);
}

double TemperatureProfile::derivative(double t) const {
  const double w = wrap_time(t, period_);
  return segment_derivative(segment_at(w), w);
}

double TemperatureProfile::eval_pinned(double t, double t_ref) const {
  return segment_eval(segment_at(wrap_time(t_ref, period_)), t);
}

double TemperatureProfile::derivative_pinned(double t, double t_ref) const {
  return segment_derivative(segment_at(wrap_time(t_ref, period_)), t);
}

double TemperatureProfile::eval_left(double t) const {
  double w = wrap_time(t, period_);
  if (w == 0.0) w = period_;
  // Piece whose half-open interval has w as its upper end or interior point.
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), w,
      [](double v, const ProfileSegment& s) { return v <= s.t1; });
  if (it == segments_.end()) --it;
  return segment_eval(*it, w);
}

double TemperatureProfile::integrate(const std::function<double(double)>& f,
                                     double a, double b) const {
  require(b >= a, ErrorCode::InvalidArgument, "integrate needs b >= a");
  if (a == b) return 0.0;
  const auto g = [&](double t) { return f(eval(t)); };
  // Split [a, b] at every periodic image of a breakpoint.
  double acc = 0.0;
  double t = a;
  while (t < b) {
    const double w = wrap_time(t, period_);
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(),
                                     w + 1e-14 * period_);
    const double next_break =
        (it == breaks_.end()) ? period_ : *it;
    double t_next = t + (next_break - w);
    if (t_next > b) t_next = b;
    acc += quad::smooth_interval(g, t, t_next, quad_);
    t = t_next;
  }
  return acc;
}

CumulativeIntegral TemperatureProfile::cumulative(
    const std::function<double(double)>& f) const {
  const auto g = [f, this](double t) { return f(eval(t)); };
  return CumulativeIntegral(g, breaks_, quad_);
}

ProfileMoments TemperatureProfile::moments() const {
  ProfileMoments m{};
  m.mean_T = integrate([](double T) { return T; }, 0.0, period_) / period_;
  m.mean_sqrtT =
      integrate([](double T) { return std::sqrt(T); }, 0.0, period_) / period_;
  m.mean_T32 =
      integrate([](double T) { return T * std::sqrt(T); }, 0.0, period_) /
      period_;
  // Central moments from centered integrands: var_sqrtT equals
  // mean_T - mean_sqrtT^2 algebraically but does not lose digits to
  // cancellation for nearly constant profiles.
  const double s1 = m.mean_sqrtT;
  m.var_sqrtT = integrate(
                    [s1](double T) {
                      const double d = std::sqrt(T) - s1;
                      return d * d;
                    },
                    0.0, period_) /
                period_;
  m.mu3_sqrtT = integrate(
                    [s1](double T) {
                      const double d = std::sqrt(T) - s1;
                      return d * d * d;
                    },
                    0.0, period_) /
                period_;
  return m;
}

double TemperatureProfile::cov_sqrtT_T() const {
  const auto m = moments();
  const double s1 = m.mean_sqrtT;
  const double tb = m.mean_T;
  return integrate(
             [s1, tb](double T) { return (std::sqrt(T) - s1) * (T - tb); },
             0.0, period_) /
         period_;
}

bool TemperatureProfile::is_constant(double rel_tol) const {
  return (T_max_ - T_min_) <= rel_tol * std::max(1.0, T_max_);
}

bool TemperatureProfile::is_carnot(double rel_tol) const {
  // Two constant levels, hot first, equal halves (after knot splitting the
  // pieces may be subdivided, so compare values piecewise).
  const double half = 0.5 * period_;
  const double tol = rel_tol * std::max(1.0, T_max_);
  double T_hot = eval(0.0);
  double T_cold = eval(half);
  if (!(T_hot > T_cold + tol)) return false;
  for (const auto& s : segments_) {
    const bool hot_side = s.t1 <= half + rel_tol * period_;
    const bool cold_side = s.t0 >= half - rel_tol * period_;
    if (!hot_side && !cold_side) return false;  // piece straddles the switch
    const double want = hot_side ? T_hot : T_cold;
    if (std::abs(piece::min_on(s.shape, s.t0, s.t1) - want) > tol) return false;
    if (std::abs(piece::max_on(s.shape, s.t0, s.t1) - want) > tol) return false;
  }
  return true;
}

}  // namespace thermo
