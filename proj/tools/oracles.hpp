#pragma once

// Brute-force reference computations used to cross-check the closed-form
// synthesis results. Everything here works from a plain T(t) callable with
// elementary Riemann/trapezoid sums and grid searches -- deliberately none
// of the library's quadrature or root-finding machinery.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

using TimeFn = std::function<double(double)>;

/// Trapezoid integral of f(t) on [a, b] with n panels.
inline double trapezoid(const TimeFn& f, double a, double b, std::int64_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double acc = 0.5 * (f(a) + f(b));
  for (std::int64_t i = 1; i < n; ++i) acc += f(a + h * static_cast<double>(i));
  return acc * h;
}

/// Midpoint bin values of T over [0, t_f).
inline std::vector<double> bin_temperatures(const TimeFn& T, double t_f,
                                            int bins) {
  std::vector<double> out(bins);
  for (int i = 0; i < bins; ++i)
    out[i] = T((i + 0.5) * t_f / bins);
  return out;
}

struct BinnedOptimum {
  double mu = 0.0;
  double eta = 0.0;
  double power = 0.0;
};

/// Discretized constrained optimum: Sigma_v piecewise constant on `bins`
/// midpoint bins, multiplier found by grid bracketing plus bisection on the
/// discrete sums, efficiency evaluated from the discrete uptake
///   U = (k_B^2 gamma/m^2) sum T^2/sigma dt - (k_B gamma/m) sum T dt.
inline BinnedOptimum binned_fixed_power_optimum(const TimeFn& T, double t_f,
                                                double power, double m,
                                                double gamma, double k_B,
                                                int bins = 1000) {
  const std::vector<double> Tv = bin_temperatures(T, t_f, bins);
  const double w = t_f / bins;
  double int_T = 0.0;
  for (double x : Tv) int_T += x * w;

  const auto residual = [&](double mu) {
    double A = 0.0, B = 0.0;
    for (double x : Tv) {
      A += std::sqrt(x * (x + mu)) * w;
      B += std::sqrt(x / (x + mu)) * w;
    }
    return A * B - (t_f * int_T - t_f * t_f * m / (gamma * k_B) * power);
  };

  double lo = 0.0;
  double hi = int_T / t_f;
  int expand = 0;
  while (residual(hi) > 0.0) {
    lo = hi;
    hi *= 10.0;
    if (++expand > 64) throw std::runtime_error("oracle: no mu bracket");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) > 0.0 ? lo : hi) = mid;
    if (hi - lo <= 1e-13 * hi) break;
  }
  BinnedOptimum out;
  out.mu = 0.5 * (lo + hi);
  double A = 0.0;
  for (double x : Tv) A += std::sqrt(x * (x + out.mu)) * w;
  const double sqrt_lambda =
      A / (k_B / m * int_T - t_f / gamma * power);
  double U = 0.0;
  for (double x : Tv) {
    const double sigma = std::sqrt(x * (x + out.mu)) / sqrt_lambda;
    U += (k_B * k_B * gamma / (m * m) * x * x / sigma -
          k_B * gamma / m * x) *
         w;
  }
  out.power = power;
  out.eta = t_f * power / U;
  return out;
}

/// Multiplier for a two-level profile from the closed-form level sums,
/// bisected on a geometrically refined grid.
inline double two_level_mu(double T_hot, double T_cold, double hot_fraction,
                           double t_f, double power, double m, double gamma,
                           double k_B) {
  const double a = hot_fraction;
  const double int_T = t_f * (a * T_hot + (1.0 - a) * T_cold);
  const auto lhs = [&](double mu) {
    const double A = t_f * (a * std::sqrt(T_hot * (T_hot + mu)) +
                            (1.0 - a) * std::sqrt(T_cold * (T_cold + mu)));
    const double B = t_f * (a * std::sqrt(T_hot / (T_hot + mu)) +
                            (1.0 - a) * std::sqrt(T_cold / (T_cold + mu)));
    return A * B;
  };
  const double rhs = t_f * int_T - t_f * t_f * m / (gamma * k_B) * power;
  double lo = 0.0, hi = int_T / t_f;
  while (lhs(hi) - rhs > 0.0) hi *= 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (lhs(mid) - rhs > 0.0 ? lo : hi) = mid;
    if (hi - lo <= 1e-13 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracles
