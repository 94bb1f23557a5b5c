#pragma once

#include <cstdint>
#include <vector>

#include "thermoengine/dynamics.hpp"

namespace thermo {

/// Ensemble-simulation controls. The step bound
///   dt <= 0.01 * min(sqrt(m/q_max), m/gamma)
/// is validated against the protocol before running.
struct McConfig {
  std::uint64_t n_particles = 100'000;
  double dt = 1e-4;
  int n_cycles_discard = 1;
  int n_cycles_measure = 2;
  std::uint64_t seed = 1;
  int n_threads = 0;      // 0 = hardware concurrency
  int n_stats_nodes = 100;
};

/// Empirical covariance trajectory and cycle energetics of the ensemble.
/// Covariance nodes are recorded on the first measured cycle; work and heat
/// are averaged per particle over all measured cycles. Standard errors are
/// across particles. Identical configs give bit-identical stats regardless
/// of the thread count.
struct EnsembleStats {
  std::vector<double> node_t;
  std::vector<double> mean_sx, se_sx;
  std::vector<double> mean_sxv, se_sxv;
  std::vector<double> mean_sv, se_sv;

  double work_mean = 0.0, work_se = 0.0;  // per-cycle work on the system
  double heat_mean = 0.0, heat_se = 0.0;  // balance route dQ = dE - dW
  double heat_strat_mean = 0.0, heat_strat_se = 0.0;  // midpoint diagnostic
  double power_mean = 0.0, power_se = 0.0;            // -work/t_f

  /// max over particles of |dE - (sum dW + sum dQ)| / max(|dE|, k_B Tmax)
  double first_law_max_rel_defect = 0.0;

  std::uint64_t n_particles = 0;
  double dt_max = 0.0;  // largest realized step after segment commensuration
  std::uint64_t seed = 0;
};

/// Euler-Maruyama ensemble simulation of the underdamped Langevin pair
///   dX = v dt,   m dv = -q(t) X dt - gamma v dt + sqrt(2 gamma k_B T(t)) dB,
/// with the position update taken semi-implicitly (new velocity), which
/// keeps the discrete phase-space contraction at 1 - gamma dt/m and avoids
/// the spurious energy pumping of the fully explicit update at low friction.
/// Per-step noise variance on v is 2 gamma k_B T(t) dt / m^2. Work accrues
/// as (qdot X^2/2) dt plus (dq X^2/2) at stiffness jumps; heat accrues by
/// per-step energy balance. The initial ensemble is drawn Gaussian from
/// `initial` (pass the periodic-orbit covariance to skip relaxation).
EnsembleStats simulate(const TemperatureProfile& profile,
                       const Protocol& protocol, const EngineParams& params,
                       const McConfig& cfg, const CovarianceState& initial);

struct EquipartitionDiagnostic {
  std::vector<double> node_t;
  std::vector<double> residual;  // |q Sx - m Sv| / (m Sv) per node
  double max_residual = 0.0;
};

/// Empirical equipartition residual series from ensemble stats.
EquipartitionDiagnostic equipartition_diagnostic(const EnsembleStats& stats,
                                                 const Protocol& protocol,
                                                 const EngineParams& params);

}  // namespace thermo
