#include "thermoengine/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "thermoengine/errors.hpp"

namespace thermo {
namespace quad {
namespace {

struct Rule {
  double x[kOrder];
  double w[kOrder];
};

// Gauss-Legendre nodes as roots of P_16, by Newton iteration from the
// Chebyshev initial guess.
Rule make_rule() {
  Rule r{};
  const int n = kOrder;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Evaluate P_n and P_{n-1} by recurrence.
      double p0 = 1.0, pm = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = pm;
        pm = p0;
        p0 = ((2.0 * k + 1.0) * x * pm - k * p2) / (k + 1.0);
      }
      p1 = n * (x * p0 - pm) / (x * x - 1.0);  // P_n'
      double dx = p0 / p1;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * p1 * p1);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return r;
}

const Rule& rule() {
  static const Rule r = make_rule();
  return r;
}

}  // namespace

const double* nodes() { return rule().x; }
const double* weights() { return rule().w; }

double panel(const std::function<double(double)>& f, double a, double b) {
  const Rule& r = rule();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < kOrder; ++i) acc += r.w[i] * f(mid + half * r.x[i]);
  return acc * half;
}

double smooth_interval(const std::function<double(double)>& f, double a,
                       double b, const QuadOptions& opts) {
  if (a == b) return 0.0;
  double prev = panel(f, a, b);
  int panels = 1;
  for (int level = 0; level < opts.max_levels; ++level) {
    panels *= 2;
    const double h = (b - a) / panels;
    double cur = 0.0;
    for (int i = 0; i < panels; ++i) cur += panel(f, a + i * h, a + (i + 1) * h);
    if (std::abs(cur - prev) <= opts.rel_tol * std::abs(cur) + 1e-305)
      return cur;
    prev = cur;
  }
  fail(ErrorCode::NonConvergent,
       "quadrature did not converge within max_levels panel doublings");
}

}  // namespace quad

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> f,
                                       const std::vector<double>& breaks,
                                       const QuadOptions& opts)
    : f_(std::move(f)) {
  require(breaks.size() >= 2, ErrorCode::InvalidArgument,
          "cumulative integral needs at least one interval");
  edges_.push_back(breaks.front());
  prefix_.push_back(0.0);
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s];
    const double b = breaks[s + 1];
    // Find the panel count that the refinement loop settles on.
    double prev = quad::panel(f_, a, b);
    int panels = 1;
    for (int level = 0; level < opts.max_levels; ++level) {
      const int next = panels * 2;
      const double h = (b - a) / next;
      double cur = 0.0;
      for (int i = 0; i < next; ++i)
        cur += quad::panel(f_, a + i * h, a + (i + 1) * h);
      const bool done =
          std::abs(cur - prev) <= opts.rel_tol * std::abs(cur) + 1e-305;
      panels = next;
      prev = cur;
      if (done) break;
      if (level + 1 == opts.max_levels)
        fail(ErrorCode::NonConvergent,
             "cumulative integral did not converge on an interval");
    }
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
      const double lo = a + i * h;
      const double hi = (i + 1 == panels) ? b : a + (i + 1) * h;
      prefix_.push_back(prefix_.back() + quad::panel(f_, lo, hi));
      edges_.push_back(hi);
    }
  }
}

double CumulativeIntegral::value(double t) const {
  require(!edges_.empty(), ErrorCode::InvalidArgument,
          "cumulative integral not built");
  if (t <= edges_.front()) return 0.0;
  if (t >= edges_.back()) return prefix_.back();
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - edges_.begin()) - 1;
  return prefix_[i] + quad::panel(f_, edges_[i], t);
}

}  // namespace thermo
