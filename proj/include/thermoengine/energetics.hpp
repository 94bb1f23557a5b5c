#pragma once

#include <optional>

#include "thermoengine/dynamics.hpp"

namespace thermo {

/// Per-cycle energy bookkeeping. Work is counted on the system (negative
/// when extracted); power is the extracted rate -W/t_f. Uptake is the
/// thermal energy made available over the cycle, uptake = -work + dissipation.
struct CycleLedger {
  double work = 0.0;          // W over the cycle
  double heat = 0.0;          // Q over the cycle
  double uptake = 0.0;        // U
  double dissipation = 0.0;   // W_diss = U + W
  double power = 0.0;         // -W / t_f
  double eta_U = 0.0;         // -W / U (1 by convention for quasi-static)
  std::optional<double> eta_Q;  // only for two-level Carnot profiles
  bool non_positive_uptake = false;
  bool quasi_static = false;  // |W| and |U| both at integration noise level
};

/// Instantaneous mean rates from the covariance state:
///   dW/dt = qdot * Sigma_x / 2,   dQ/dt = gamma (k_B T / m - Sigma_v).
struct Rates {
  double dW;
  double dQ;
};
Rates rates(const CovarianceState& state, double q, double qdot, double T,
            const EngineParams& params);

/// Cycle power measured two ways on a periodic trajectory: from the heat
/// route (gamma/t_f) int (k_B T/m - Sigma_v) dt and from the work route
/// -(1/t_f)[ int (qdot Sigma_x / 2) dt + jump terms ]. The heat-side value
/// is the primary estimate.
struct CyclePower {
  double heat_side;
  double work_side;
};
CyclePower cycle_power(const Trajectory& traj, const Protocol& protocol,
                       const TemperatureProfile& profile,
                       const EngineParams& params, double periodic_tol = 1e-9);

/// Full per-cycle ledger. Uptake comes from the reduced closed form
///   (k_B^2 gamma/m^2) int T^2/Sigma_v - (k_B gamma/m) int T
/// for reduced trajectories, and from the entropy route k_B int T dS with
/// the exact two-dimensional Gaussian entropy for full trajectories
/// (evaluated piecewise as -k_B [ int S dT + sum_jumps S dT ]).
CycleLedger cycle_ledger(const Trajectory& traj, const Protocol& protocol,
                         const TemperatureProfile& profile,
                         const EngineParams& params,
                         double periodic_tol = 1e-9);

/// Classical efficiency -W/Q_h for an equal-halves two-level profile, with
/// Q_h the heat taken up over the hot half-period. Throws NotCarnotProfile
/// when the hot bath is not identifiable and DegenerateCycle when the cycle
/// does no work.
double eta_q_carnot(const Trajectory& traj, const Protocol& protocol,
                    const TemperatureProfile& profile,
                    const EngineParams& params, double periodic_tol = 1e-9);

}  // namespace thermo
