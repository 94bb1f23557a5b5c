#include "thermoengine.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "thermoengine/dynamics.hpp"
#include "thermoengine/energetics.hpp"
#include "thermoengine/errors.hpp"
#include "thermoengine/montecarlo.hpp"
#include "thermoengine/profiles.hpp"
#include "thermoengine/synthesis.hpp"
#include "thermoengine/version.hpp"

// ---------------------------------------------------------------------------
// Opaque handle definitions
// ---------------------------------------------------------------------------

struct te_profile {
  thermo::ProfilePtr p;
};

struct te_profile_builder {
  double period;
  std::vector<thermo::ProfileSegment> segments;
  std::string error;  // first add() failure, reported by finish()
};

struct te_protocol {
  std::shared_ptr<const thermo::Protocol> q;
};

struct te_sigma {
  std::shared_ptr<const thermo::SigmaTrajectory> s;
};

struct te_trajectory {
  std::shared_ptr<const thermo::Trajectory> t;
};

struct te_mc_stats {
  thermo::EnsembleStats s;
};

namespace {

thread_local std::string g_last_error;

te_status code_of(const thermo::Error& e) {
  using thermo::ErrorCode;
  switch (e.code()) {
    case ErrorCode::InvalidArgument: return TE_ERR_INVALID_ARGUMENT;
    case ErrorCode::ParseError: return TE_ERR_PARSE;
    case ErrorCode::NonConvergent: return TE_ERR_NONCONVERGENT;
    case ErrorCode::PowerOutOfRange: return TE_ERR_POWER_OUT_OF_RANGE;
    case ErrorCode::BracketFailure: return TE_ERR_BRACKET_FAILURE;
    case ErrorCode::StepFailure: return TE_ERR_STEP_FAILURE;
    case ErrorCode::PositivityLoss: return TE_ERR_POSITIVITY_LOSS;
    case ErrorCode::NoConvergence: return TE_ERR_NO_CONVERGENCE;
    case ErrorCode::NotPeriodic: return TE_ERR_NOT_PERIODIC;
    case ErrorCode::NotCarnotProfile: return TE_ERR_NOT_CARNOT_PROFILE;
    case ErrorCode::DegenerateProfile: return TE_ERR_DEGENERATE_PROFILE;
    case ErrorCode::DegenerateCycle: return TE_ERR_DEGENERATE_CYCLE;
    case ErrorCode::UnstableStep: return TE_ERR_UNSTABLE_STEP;
  }
  return TE_ERR_INTERNAL;
}

template <typename Fn>
te_status guarded(Fn&& fn) {
  try {
    fn();
    return TE_OK;
  } catch (const thermo::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return TE_ERR_INTERNAL;
  }
}

te_status invalid(const char* msg) {
  g_last_error = msg;
  return TE_ERR_INVALID_ARGUMENT;
}

thermo::EngineParams to_params(const te_params& p) {
  return {p.m, p.gamma, p.k_B, p.t_f, p.q0};
}

thermo::OdeOptions to_ode(const te_ode_options* o) {
  thermo::OdeOptions out;
  if (o != nullptr) {
    if (o->rel_tol > 0.0) out.rel_tol = o->rel_tol;
    if (o->abs_tol > 0.0) out.abs_tol = o->abs_tol;
  }
  return out;
}

}  // namespace

extern "C" {

const char* te_version(void) { return thermo::kVersion; }
const char* te_last_error(void) { return g_last_error.c_str(); }

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

te_profile_builder* te_profile_builder_new(double period) {
  auto* b = new te_profile_builder;
  b->period = period;
  return b;
}

void te_profile_builder_abandon(te_profile_builder* b) { delete b; }

te_status te_profile_builder_add_constant(te_profile_builder* b, double t0,
                                          double t1, double T) {
  if (b == nullptr) return invalid("null builder");
  b->segments.push_back({t0, t1, thermo::ConstantPiece{T}});
  return TE_OK;
}

te_status te_profile_builder_add_sinusoid(te_profile_builder* b, double t0,
                                          double t1, double T_mean,
                                          double T_amp, double omega,
                                          double phase) {
  if (b == nullptr) return invalid("null builder");
  b->segments.push_back(
      {t0, t1, thermo::SinusoidPiece{T_mean, T_amp, omega, phase}});
  return TE_OK;
}

te_status te_profile_builder_add_sampled(te_profile_builder* b,
                                         const double* knot_t,
                                         const double* knot_T, size_t n) {
  if (b == nullptr) return invalid("null builder");
  if (knot_t == nullptr || knot_T == nullptr || n < 2)
    return invalid("sampled piece needs at least two knots");
  for (size_t i = 0; i + 1 < n; ++i) {
    b->segments.push_back({knot_t[i], knot_t[i + 1],
                           thermo::LinearPiece{knot_T[i], knot_T[i + 1]}});
  }
  return TE_OK;
}

te_status te_profile_builder_finish(te_profile_builder* b, te_profile** out) {
  if (b == nullptr || out == nullptr) return invalid("null argument");
  std::unique_ptr<te_profile_builder> owned(b);
  return guarded([&] {
    auto profile = std::make_shared<thermo::TemperatureProfile>(
        owned->period, owned->segments);
    *out = new te_profile{std::move(profile)};
  });
}

te_status te_profile_constant(double T, double period, te_profile** out) {
  if (out == nullptr) return invalid("null out");
  return guarded([&] {
    *out = new te_profile{std::make_shared<thermo::TemperatureProfile>(
        thermo::TemperatureProfile::constant(T, period))};
  });
}

te_status te_profile_sinusoid(double T_mean, double T_amp, double period,
                              double phase, te_profile** out) {
  if (out == nullptr) return invalid("null out");
  return guarded([&] {
    *out = new te_profile{std::make_shared<thermo::TemperatureProfile>(
        thermo::TemperatureProfile::sinusoid(T_mean, T_amp, period, phase))};
  });
}

te_status te_profile_two_level(double T_hot, double T_cold, double period,
                               double hot_fraction, te_profile** out) {
  if (out == nullptr) return invalid("null out");
  return guarded([&] {
    *out = new te_profile{std::make_shared<thermo::TemperatureProfile>(
        thermo::TemperatureProfile::two_level(T_hot, T_cold, period,
                                              hot_fraction))};
  });
}

te_status te_profile_carnot(double T_hot, double T_cold, double period,
                            te_profile** out) {
  return te_profile_two_level(T_hot, T_cold, period, 0.5, out);
}

void te_profile_free(te_profile* p) { delete p; }

double te_profile_period(const te_profile* p) { return p->p->period(); }
double te_profile_eval(const te_profile* p, double t) {
  return p->p->eval(t);
}
double te_profile_derivative(const te_profile* p, double t) {
  return p->p->derivative(t);
}
int te_profile_jump_count(const te_profile* p) {
  return static_cast<int>(p->p->jump_times().size());
}
double te_profile_jump_time(const te_profile* p, int i) {
  const auto& j = p->p->jump_times();
  if (i < 0 || static_cast<size_t>(i) >= j.size()) return NAN;
  return j[static_cast<size_t>(i)];
}

te_status te_profile_moments(const te_profile* p, te_moments* out) {
  if (p == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    const auto m = p->p->moments();
    out->mean_T = m.mean_T;
    out->mean_sqrtT = m.mean_sqrtT;
    out->mean_T32 = m.mean_T32;
    out->var_sqrtT = m.var_sqrtT;
    out->mu3_sqrtT = m.mu3_sqrtT;
  });
}

te_status te_profile_integrate(const te_profile* p,
                               double (*f)(double T, void* ctx), void* ctx,
                               double a, double b, double* out) {
  if (p == nullptr || f == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = p->p->integrate([f, ctx](double T) { return f(T, ctx); }, a, b);
  });
}

// ---------------------------------------------------------------------------
// Params
// ---------------------------------------------------------------------------

double te_default_q0(double m, double gamma, double ratio) {
  return thermo::EngineParams::default_q0(m, gamma,
                                          ratio > 0.0 ? ratio : 1e-2);
}

te_status te_params_validate(const te_params* p, const te_profile* profile) {
  if (p == nullptr || profile == nullptr) return invalid("null argument");
  return guarded([&] { to_params(*p).validate(*profile->p); });
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

te_status te_max_power_value(const te_profile* p, const te_params* params,
                             double* out) {
  if (p == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded(
      [&] { *out = thermo::max_power_value(*p->p, to_params(*params)); });
}

te_status te_max_power_sigma(const te_profile* p, const te_params* params,
                             te_sigma** out) {
  if (p == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = new te_sigma{std::make_shared<thermo::SigmaTrajectory>(
        thermo::max_power_sigma(p->p, to_params(*params)))};
  });
}

te_status te_max_power_protocol(const te_profile* p, const te_params* params,
                                te_protocol** out) {
  if (p == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = new te_protocol{std::make_shared<thermo::Protocol>(
        thermo::max_power_protocol(p->p, to_params(*params)))};
  });
}

te_status te_solve_mu(const te_profile* p, const te_params* params,
                      double power, double* out) {
  if (p == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded(
      [&] { *out = thermo::solve_mu(*p->p, to_params(*params), power); });
}

te_status te_fixed_power_sigma(const te_profile* p, const te_params* params,
                               double power, te_sigma** out) {
  if (p == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = new te_sigma{std::make_shared<thermo::SigmaTrajectory>(
        thermo::fixed_power_sigma(p->p, to_params(*params), power))};
  });
}

te_status te_fixed_power_protocol(const te_profile* p, const te_params* params,
                                  double power, te_protocol** out) {
  if (p == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = new te_protocol{std::make_shared<thermo::Protocol>(
        thermo::fixed_power_protocol(p->p, to_params(*params), power))};
  });
}

te_status te_max_efficiency_at_power(const te_profile* p,
                                     const te_params* params, double power,
                                     double* out) {
  if (p == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = thermo::max_efficiency_at_power(*p->p, to_params(*params), power);
  });
}

te_status te_efficiency_at_max_power(const te_profile* p, double* out) {
  if (p == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] { *out = thermo::efficiency_at_max_power(*p->p); });
}

te_status te_linear_response_protocol(const te_profile* p,
                                      const te_params* params,
                                      te_protocol** out) {
  if (p == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = new te_protocol{std::make_shared<thermo::Protocol>(
        thermo::linear_response_protocol(*p->p, to_params(*params)))};
  });
}

te_status te_constant_protocol(double q, double period, te_protocol** out) {
  if (out == nullptr) return invalid("null out");
  return guarded([&] {
    *out = new te_protocol{std::make_shared<thermo::Protocol>(
        thermo::Protocol::constant(q, period))};
  });
}

void te_protocol_free(te_protocol* q) { delete q; }
double te_protocol_period(const te_protocol* q) { return q->q->period(); }
double te_protocol_eval(const te_protocol* q, double t) {
  return q->q->eval(t);
}
double te_protocol_log_derivative(const te_protocol* q, double t) {
  return q->q->log_derivative(t);
}
double te_protocol_min_q(const te_protocol* q) { return q->q->min_q(); }
double te_protocol_max_q(const te_protocol* q) { return q->q->max_q(); }
double te_frequency_ratio(const te_protocol* q, const te_params* params) {
  return thermo::frequency_ratio_diagnostic(*q->q, to_params(*params));
}

void te_sigma_free(te_sigma* s) { delete s; }
double te_sigma_eval(const te_sigma* s, double t) { return s->s->eval(t); }
double te_sigma_mu(const te_sigma* s) {
  const auto mu = s->s->mu();
  return mu.has_value() ? *mu : NAN;
}

// ---------------------------------------------------------------------------
// Dynamics
// ---------------------------------------------------------------------------

te_status te_integrate_reduced(const te_profile* p, const te_protocol* q,
                               const te_params* params, double sigma_v0,
                               const te_ode_options* opts,
                               te_trajectory** out) {
  if (p == nullptr || q == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    auto traj = thermo::integrate_reduced(*p->p, *q->q, to_params(*params),
                                          sigma_v0, to_ode(opts));
    *out = new te_trajectory{
        std::make_shared<thermo::Trajectory>(std::move(traj))};
  });
}

te_status te_integrate_full(const te_profile* p, const te_protocol* q,
                            const te_params* params, double sigma_x,
                            double sigma_xv, double sigma_v,
                            const te_ode_options* opts, te_trajectory** out) {
  if (p == nullptr || q == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    auto traj = thermo::integrate_full(*p->p, *q->q, to_params(*params),
                                       {sigma_x, sigma_xv, sigma_v},
                                       to_ode(opts));
    *out = new te_trajectory{
        std::make_shared<thermo::Trajectory>(std::move(traj))};
  });
}

te_status te_find_periodic_orbit(te_model model, const te_profile* p,
                                 const te_protocol* q, const te_params* params,
                                 const double* guess3,
                                 const te_orbit_options* opts,
                                 te_trajectory** out, double state0[3],
                                 int* cycles) {
  if (p == nullptr || q == nullptr || params == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    thermo::OrbitOptions oo;
    if (opts != nullptr) {
      if (opts->orbit_tol > 0.0) oo.orbit_tol = opts->orbit_tol;
      if (opts->max_cycles > 0) oo.max_cycles = opts->max_cycles;
      oo.ode = to_ode(&opts->ode);
    }
    thermo::CovarianceState guess{};
    const thermo::CovarianceState* gp = nullptr;
    if (guess3 != nullptr) {
      guess = {guess3[0], guess3[1], guess3[2]};
      gp = &guess;
    }
    auto res = thermo::find_periodic_orbit(
        model == TE_MODEL_REDUCED ? thermo::Model::Reduced
                                  : thermo::Model::Full,
        *p->p, *q->q, to_params(*params), gp, oo);
    if (state0 != nullptr) {
      state0[0] = res.state0.sigma_x;
      state0[1] = res.state0.sigma_xv;
      state0[2] = res.state0.sigma_v;
    }
    if (cycles != nullptr) *cycles = res.cycles;
    *out = new te_trajectory{
        std::make_shared<thermo::Trajectory>(std::move(res.trajectory))};
  });
}

void te_trajectory_free(te_trajectory* t) { delete t; }

te_model te_trajectory_model(const te_trajectory* t) {
  return std::holds_alternative<thermo::ReducedTrajectory>(*t->t)
             ? TE_MODEL_REDUCED
             : TE_MODEL_FULL;
}

te_status te_trajectory_eval(const te_trajectory* t, double time,
                             double out_state[3]) {
  if (t == nullptr || out_state == nullptr) return invalid("null argument");
  return guarded([&] {
    if (const auto* r = std::get_if<thermo::ReducedTrajectory>(t->t.get())) {
      out_state[0] = NAN;
      out_state[1] = NAN;
      out_state[2] = r->sigma_v(time);
    } else {
      const auto s = std::get<thermo::FullTrajectory>(*t->t).state(time);
      out_state[0] = s.sigma_x;
      out_state[1] = s.sigma_xv;
      out_state[2] = s.sigma_v;
    }
  });
}

double te_trajectory_begin_sigma_v(const te_trajectory* t) {
  if (const auto* r = std::get_if<thermo::ReducedTrajectory>(t->t.get()))
    return r->sigma_v_begin();
  return std::get<thermo::FullTrajectory>(*t->t).state_begin().sigma_v;
}

double te_trajectory_end_sigma_v(const te_trajectory* t) {
  if (const auto* r = std::get_if<thermo::ReducedTrajectory>(t->t.get()))
    return r->sigma_v_end();
  return std::get<thermo::FullTrajectory>(*t->t).state_end().sigma_v;
}

// ---------------------------------------------------------------------------
// Energetics
// ---------------------------------------------------------------------------

te_status te_rates(double sigma_x, double sigma_xv, double sigma_v, double q,
                   double qdot, double T, const te_params* params,
                   double* dW_rate, double* dQ_rate) {
  if (params == nullptr || dW_rate == nullptr || dQ_rate == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const auto r = thermo::rates({sigma_x, sigma_xv, sigma_v}, q, qdot, T,
                                 to_params(*params));
    *dW_rate = r.dW;
    *dQ_rate = r.dQ;
  });
}

te_status te_cycle_power(const te_trajectory* t, const te_protocol* q,
                         const te_profile* p, const te_params* params,
                         double* heat_side, double* work_side) {
  if (t == nullptr || q == nullptr || p == nullptr || params == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const auto cp =
        thermo::cycle_power(*t->t, *q->q, *p->p, to_params(*params));
    if (heat_side != nullptr) *heat_side = cp.heat_side;
    if (work_side != nullptr) *work_side = cp.work_side;
  });
}

te_status te_cycle_ledger(const te_trajectory* t, const te_protocol* q,
                          const te_profile* p, const te_params* params,
                          te_ledger* out) {
  if (t == nullptr || q == nullptr || p == nullptr || params == nullptr ||
      out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const auto l =
        thermo::cycle_ledger(*t->t, *q->q, *p->p, to_params(*params));
    out->work = l.work;
    out->heat = l.heat;
    out->uptake = l.uptake;
    out->dissipation = l.dissipation;
    out->power = l.power;
    out->eta_U = l.eta_U;
    out->eta_Q = l.eta_Q.has_value() ? *l.eta_Q : NAN;
    out->has_eta_Q = l.eta_Q.has_value() ? 1 : 0;
    out->non_positive_uptake = l.non_positive_uptake ? 1 : 0;
    out->quasi_static = l.quasi_static ? 1 : 0;
  });
}

te_status te_eta_q_carnot(const te_trajectory* t, const te_protocol* q,
                          const te_profile* p, const te_params* params,
                          double* out) {
  if (t == nullptr || q == nullptr || p == nullptr || params == nullptr ||
      out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    *out = thermo::eta_q_carnot(*t->t, *q->q, *p->p, to_params(*params));
  });
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

te_status te_mc_simulate(const te_profile* p, const te_protocol* q,
                         const te_params* params, const te_mc_config* cfg,
                         const double initial3[3], te_mc_stats** out) {
  if (p == nullptr || q == nullptr || params == nullptr || cfg == nullptr ||
      initial3 == nullptr || out == nullptr)
    return invalid("null argument");
  return guarded([&] {
    thermo::McConfig mc;
    mc.n_particles = cfg->n_particles;
    mc.dt = cfg->dt;
    mc.n_cycles_discard = cfg->n_cycles_discard;
    mc.n_cycles_measure = cfg->n_cycles_measure;
    mc.seed = cfg->seed;
    mc.n_threads = cfg->n_threads;
    if (cfg->n_stats_nodes > 0) mc.n_stats_nodes = cfg->n_stats_nodes;
    auto stats = thermo::simulate(*p->p, *q->q, to_params(*params), mc,
                                  {initial3[0], initial3[1], initial3[2]});
    *out = new te_mc_stats{std::move(stats)};
  });
}

void te_mc_stats_free(te_mc_stats* s) { delete s; }

int te_mc_stats_node_count(const te_mc_stats* s) {
  return static_cast<int>(s->s.node_t.size());
}

te_status te_mc_stats_node(const te_mc_stats* s, int i, double* t, double* sx,
                           double* se_sx, double* sxv, double* se_sxv,
                           double* sv, double* se_sv) {
  if (s == nullptr) return invalid("null stats");
  if (i < 0 || static_cast<size_t>(i) >= s->s.node_t.size())
    return invalid("node index out of range");
  const auto k = static_cast<size_t>(i);
  if (t != nullptr) *t = s->s.node_t[k];
  if (sx != nullptr) *sx = s->s.mean_sx[k];
  if (se_sx != nullptr) *se_sx = s->s.se_sx[k];
  if (sxv != nullptr) *sxv = s->s.mean_sxv[k];
  if (se_sxv != nullptr) *se_sxv = s->s.se_sxv[k];
  if (sv != nullptr) *sv = s->s.mean_sv[k];
  if (se_sv != nullptr) *se_sv = s->s.se_sv[k];
  return TE_OK;
}

te_status te_mc_stats_energy(const te_mc_stats* s, double* work_mean,
                             double* work_se, double* heat_mean,
                             double* heat_se, double* heat_strat_mean,
                             double* heat_strat_se, double* power_mean,
                             double* power_se) {
  if (s == nullptr) return invalid("null stats");
  if (work_mean != nullptr) *work_mean = s->s.work_mean;
  if (work_se != nullptr) *work_se = s->s.work_se;
  if (heat_mean != nullptr) *heat_mean = s->s.heat_mean;
  if (heat_se != nullptr) *heat_se = s->s.heat_se;
  if (heat_strat_mean != nullptr) *heat_strat_mean = s->s.heat_strat_mean;
  if (heat_strat_se != nullptr) *heat_strat_se = s->s.heat_strat_se;
  if (power_mean != nullptr) *power_mean = s->s.power_mean;
  if (power_se != nullptr) *power_se = s->s.power_se;
  return TE_OK;
}

double te_mc_stats_first_law_defect(const te_mc_stats* s) {
  return s->s.first_law_max_rel_defect;
}

te_status te_mc_equipartition(const te_mc_stats* s, const te_protocol* q,
                              const te_params* params, double* residuals,
                              double* max_residual) {
  if (s == nullptr || q == nullptr || params == nullptr)
    return invalid("null argument");
  return guarded([&] {
    const auto d =
        thermo::equipartition_diagnostic(s->s, *q->q, to_params(*params));
    if (residuals != nullptr) {
      for (size_t j = 0; j < d.residual.size(); ++j)
        residuals[j] = d.residual[j];
    }
    if (max_residual != nullptr) *max_residual = d.max_residual;
  });
}

}  // extern "C"
