#pragma once

#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "thermoengine/quadrature.hpp"

namespace thermo {

// ---------------------------------------------------------------------------
// Piece shapes
// ---------------------------------------------------------------------------

/// T(t) = value on the piece.
struct ConstantPiece {
  double value;
};

/// T(t) = mean + amp * cos(omega * t + phase), in absolute time t.
struct SinusoidPiece {
  double mean;
  double amp;
  double omega;
  double phase;
};

/// Linear interpolation in T between the two endpoints of the piece.
struct LinearPiece {
  double T_start;
  double T_end;
};

using PieceShape = std::variant<ConstantPiece, SinusoidPiece, LinearPiece>;

/// One smooth piece of the profile on [t0, t1).
struct ProfileSegment {
  double t0;
  double t1;
  PieceShape shape;
};

/// Period averages of the sqrt-temperature moments. All fields use the
/// convention mean_g = (1/t_f) \int_0^{t_f} g(T(t)) dt.
struct ProfileMoments {
  double mean_T;       // mean of T
  double mean_sqrtT;   // mean of sqrt(T)
  double mean_T32;     // mean of T^(3/2)
  double var_sqrtT;    // mean_T - mean_sqrtT^2
  double mu3_sqrtT;    // mean of (sqrt(T) - mean_sqrtT)^3
};

// ---------------------------------------------------------------------------
// TemperatureProfile
// ---------------------------------------------------------------------------

/// Strictly positive periodic bath temperature, stored as an ordered list of
/// smooth pieces tiling [0, t_f) exactly. Values at discontinuities follow
/// the right-limit convention: eval(t) at a jump returns the limit from
/// above, and the cycle is read as running from 0+ to t_f+.
///
/// Immutable after construction; all methods are const and thread-safe.
class TemperatureProfile {
 public:
  /// Validates positivity, tiling and period; derives interior jump times
  /// from left/right limit mismatches at piece boundaries. Sampled pieces
  /// are split at their knots, so every stored segment is smooth.
  TemperatureProfile(double period, std::vector<ProfileSegment> segments,
                     QuadOptions quad = {});

  // Convenience factories.
  static TemperatureProfile constant(double T, double period);
  static TemperatureProfile sinusoid(double T_mean, double T_amp,
                                     double period, double phase = 0.0);
  /// Two-level profile: T_hot on [0, hot_fraction*t_f), T_cold after.
  static TemperatureProfile two_level(double T_hot, double T_cold,
                                      double period,
                                      double hot_fraction = 0.5);
  static TemperatureProfile carnot(double T_hot, double T_cold,
                                   double period);
  /// Piecewise-linear profile through (t, T) knots; first knot at t=0, last
  /// at t=period (values of the two need not match -- that is a jump).
  static TemperatureProfile sampled(
      const std::vector<std::pair<double, double>>& knots, double period);

  double period() const { return period_; }

  /// T at the periodic extension of t (right-limit at jumps), always > 0.
  double eval(double t) const;

  /// dT/dt inside the smooth piece containing t (right-limit at edges).
  double derivative(double t) const;

  /// Smooth extension of the piece containing t_ref, evaluated at t. Lets
  /// integrators sample a segment's own closed form at its endpoints
  /// instead of picking up the neighbouring piece across a jump.
  double eval_pinned(double t, double t_ref) const;
  double derivative_pinned(double t, double t_ref) const;

  /// Left-limit of the periodic extension: T(t-), with T(0-) = T(t_f-).
  double eval_left(double t) const;

  /// Interior discontinuity locations in (0, t_f). A mismatch between
  /// T(t_f-) and T(0+) is a wrap jump and is not listed here.
  const std::vector<double>& jump_times() const { return jumps_; }

  bool has_wrap_jump() const { return wrap_jump_; }

  const std::vector<ProfileSegment>& segments() const { return segments_; }

  /// All smooth-piece boundaries in [0, t_f], including both endpoints.
  const std::vector<double>& breakpoints() const { return breaks_; }

  /// \int_a^b f(T(t)) dt by composite Gauss-Legendre between breakpoints,
  /// refined panel-wise to quad().rel_tol. [a, b] may span several periods.
  double integrate(const std::function<double(double)>& f, double a,
                   double b) const;

  /// Prefix integral of f(T(.)) over one period, for protocol tables.
  CumulativeIntegral cumulative(const std::function<double(double)>& f) const;

  ProfileMoments moments() const;

  /// Cov(sqrt T, T) = mean_T32 - mean_T * mean_sqrtT, evaluated through a
  /// centered integrand (accurate for nearly constant profiles).
  double cov_sqrtT_T() const;

  /// True within tol if every piece is the same constant.
  bool is_constant(double rel_tol = 1e-12) const;

  /// Matches the two-level shape with equal half-periods and T_hot > T_cold.
  bool is_carnot(double rel_tol = 1e-9) const;

  double min_temperature() const { return T_min_; }
  double max_temperature() const { return T_max_; }

  const QuadOptions& quad() const { return quad_; }

 private:
  const ProfileSegment& segment_at(double t_wrapped) const;

  double period_;
  std::vector<ProfileSegment> segments_;
  std::vector<double> jumps_;
  std::vector<double> breaks_;
  bool wrap_jump_ = false;
  double T_min_ = 0.0;
  double T_max_ = 0.0;
  QuadOptions quad_;
};

/// Shared handle used by protocols and sigma trajectories that need to keep
/// their generating profile alive.
using ProfilePtr = std::shared_ptr<const TemperatureProfile>;

namespace piece {
double eval(const PieceShape& s, double t);
double derivative(const PieceShape& s, double t);
/// Exact minimum of T over the closed sub-interval [t0, t1] of the piece.
double min_on(const PieceShape& s, double t0, double t1);
double max_on(const PieceShape& s, double t0, double t1);
}  // namespace piece

}  // namespace thermo
