#pragma once

#include <functional>
#include <vector>

namespace thermo {

/// Controls for the composite Gauss-Legendre integrator. Panels inside each
/// smooth interval are doubled until the result changes by less than
/// `rel_tol` relative, up to `max_levels` doublings.
struct QuadOptions {
  double rel_tol = 1e-10;
  int max_levels = 20;
};

namespace quad {

/// Number of Gauss-Legendre abscissas per panel.
inline constexpr int kOrder = 16;

/// Nodes/weights of the order-16 rule on [-1, 1]. Computed once via Newton
/// iteration on the Legendre polynomial.
const double* nodes();
const double* weights();

/// Single-panel Gauss-Legendre pass of f over [a, b].
double panel(const std::function<double(double)>& f, double a, double b);

/// Integrate f over one smooth interval [a, b], doubling the panel count
/// until the relative change drops below opts.rel_tol. Throws
/// Error(NonConvergent) when max_levels is exhausted.
double smooth_interval(const std::function<double(double)>& f, double a,
                       double b, const QuadOptions& opts);

}  // namespace quad

/// Prefix integral F(t) = \int_{t0}^{t} f over a chain of smooth intervals.
///
/// The converged panel subdivision of each interval is frozen at build time;
/// evaluation adds the stored prefix at the nearest panel edge to a fresh
/// single-panel pass over the remainder, so value() is consistent with
/// total() to machine precision and costs O(log #panels).
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;

  /// `breaks` are the smooth-interval boundaries (ascending, size >= 2);
  /// f may be discontinuous across breaks but must be smooth inside.
  CumulativeIntegral(std::function<double(double)> f,
                     const std::vector<double>& breaks,
                     const QuadOptions& opts = {});

  double value(double t) const;          // F(t), t within [front, back]
  double total() const { return prefix_.empty() ? 0.0 : prefix_.back(); }
  double front() const { return edges_.front(); }
  double back() const { return edges_.back(); }

 private:
  std::function<double(double)> f_;
  std::vector<double> edges_;   // panel edges, ascending
  std::vector<double> prefix_;  // prefix_[i] = F(edges_[i]), prefix_[0] = 0
};

}  // namespace thermo
