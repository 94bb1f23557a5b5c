/*
 * thermoengine C API
 *
 * Synthesis and validation of optimal stiffness protocols for an
 * underdamped Brownian particle in a harmonic trap coupled to a bath with a
 * periodic temperature profile.
 *
 * Conventions:
 *   - Every fallible call returns te_status; TE_OK is 0. On failure,
 *     te_last_error() returns a thread-local message describing the fault.
 *   - Objects returned through te_*_create/te_*('** out') calls are owned by
 *     the caller and released with the matching te_*_free.
 *   - All objects are immutable after creation and safe to share across
 *     threads.
 */

#ifndef THERMOENGINE_H
#define THERMOENGINE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum te_status {
  TE_OK = 0,
  TE_ERR_INVALID_ARGUMENT = 1,
  TE_ERR_PARSE = 2,
  TE_ERR_NONCONVERGENT = 3,
  TE_ERR_POWER_OUT_OF_RANGE = 4,
  TE_ERR_BRACKET_FAILURE = 5,
  TE_ERR_STEP_FAILURE = 6,
  TE_ERR_POSITIVITY_LOSS = 7,
  TE_ERR_NO_CONVERGENCE = 8,
  TE_ERR_NOT_PERIODIC = 9,
  TE_ERR_NOT_CARNOT_PROFILE = 10,
  TE_ERR_DEGENERATE_PROFILE = 11,
  TE_ERR_DEGENERATE_CYCLE = 12,
  TE_ERR_UNSTABLE_STEP = 13,
  TE_ERR_INTERNAL = 99
} te_status;

const char* te_version(void);
/* Thread-local message for the last failing call on this thread. */
const char* te_last_error(void);

/* ------------------------------------------------------------------ */
/* Temperature profiles                                                */
/* ------------------------------------------------------------------ */

typedef struct te_profile te_profile;
typedef struct te_profile_builder te_profile_builder;

/* Assemble a profile piece by piece; pieces must tile [0, period) exactly.
   finish() validates and frees the builder on success and failure alike. */
te_profile_builder* te_profile_builder_new(double period);
void te_profile_builder_abandon(te_profile_builder* b);
te_status te_profile_builder_add_constant(te_profile_builder* b, double t0,
                                          double t1, double T);
te_status te_profile_builder_add_sinusoid(te_profile_builder* b, double t0,
                                          double t1, double T_mean,
                                          double T_amp, double omega,
                                          double phase);
/* Piecewise-linear piece through n >= 2 (t, T) knots spanning [t0, tn). */
te_status te_profile_builder_add_sampled(te_profile_builder* b,
                                         const double* knot_t,
                                         const double* knot_T, size_t n);
te_status te_profile_builder_finish(te_profile_builder* b, te_profile** out);

te_status te_profile_constant(double T, double period, te_profile** out);
te_status te_profile_sinusoid(double T_mean, double T_amp, double period,
                              double phase, te_profile** out);
te_status te_profile_two_level(double T_hot, double T_cold, double period,
                               double hot_fraction, te_profile** out);
te_status te_profile_carnot(double T_hot, double T_cold, double period,
                            te_profile** out);
void te_profile_free(te_profile* p);

double te_profile_period(const te_profile* p);
double te_profile_eval(const te_profile* p, double t);
double te_profile_derivative(const te_profile* p, double t);
int te_profile_jump_count(const te_profile* p);
double te_profile_jump_time(const te_profile* p, int i);

typedef struct te_moments {
  double mean_T;
  double mean_sqrtT;
  double mean_T32;
  double var_sqrtT;
  double mu3_sqrtT;
} te_moments;

te_status te_profile_moments(const te_profile* p, te_moments* out);

/* Integral of f(T(t)) dt over [a, b] (piecewise Gauss-Legendre). */
te_status te_profile_integrate(const te_profile* p,
                               double (*f)(double T, void* ctx), void* ctx,
                               double a, double b, double* out);

/* ------------------------------------------------------------------ */
/* Engine parameters                                                   */
/* ------------------------------------------------------------------ */

typedef struct te_params {
  double m;
  double gamma;
  double k_B;
  double t_f;
  double q0;
} te_params;

/* q0 with gamma / sqrt(m q0) = ratio (pass 0 for the default 1e-2). */
double te_default_q0(double m, double gamma, double ratio);
te_status te_params_validate(const te_params* p, const te_profile* profile);

/* ------------------------------------------------------------------ */
/* Protocol synthesis                                                  */
/* ------------------------------------------------------------------ */

typedef struct te_protocol te_protocol;
typedef struct te_sigma te_sigma;

te_status te_max_power_value(const te_profile* p, const te_params* params,
                             double* out);
te_status te_max_power_sigma(const te_profile* p, const te_params* params,
                             te_sigma** out);
te_status te_max_power_protocol(const te_profile* p, const te_params* params,
                                te_protocol** out);
te_status te_solve_mu(const te_profile* p, const te_params* params,
                      double power, double* out);
te_status te_fixed_power_sigma(const te_profile* p, const te_params* params,
                               double power, te_sigma** out);
te_status te_fixed_power_protocol(const te_profile* p, const te_params* params,
                                  double power, te_protocol** out);
te_status te_max_efficiency_at_power(const te_profile* p,
                                     const te_params* params, double power,
                                     double* out);
te_status te_efficiency_at_max_power(const te_profile* p, double* out);
te_status te_linear_response_protocol(const te_profile* p,
                                      const te_params* params,
                                      te_protocol** out);
te_status te_constant_protocol(double q, double period, te_protocol** out);

void te_protocol_free(te_protocol* q);
double te_protocol_period(const te_protocol* q);
double te_protocol_eval(const te_protocol* q, double t);
double te_protocol_log_derivative(const te_protocol* q, double t);
double te_protocol_min_q(const te_protocol* q);
double te_protocol_max_q(const te_protocol* q);
/* Drive-vs-natural-frequency diagnostic (2 pi/t_f) sqrt(m / min q). */
double te_frequency_ratio(const te_protocol* q, const te_params* params);

void te_sigma_free(te_sigma* s);
double te_sigma_eval(const te_sigma* s, double t);
/* Multiplier mu for fixed-power trajectories; NaN otherwise. */
double te_sigma_mu(const te_sigma* s);

/* ------------------------------------------------------------------ */
/* Covariance dynamics                                                 */
/* ------------------------------------------------------------------ */

typedef struct te_trajectory te_trajectory;

typedef enum te_model { TE_MODEL_REDUCED = 0, TE_MODEL_FULL = 1 } te_model;

typedef struct te_ode_options {
  double rel_tol; /* 0 -> 1e-9  */
  double abs_tol; /* 0 -> 1e-12 */
} te_ode_options;

te_status te_integrate_reduced(const te_profile* p, const te_protocol* q,
                               const te_params* params, double sigma_v0,
                               const te_ode_options* opts /* nullable */,
                               te_trajectory** out);
te_status te_integrate_full(const te_profile* p, const te_protocol* q,
                            const te_params* params, double sigma_x,
                            double sigma_xv, double sigma_v,
                            const te_ode_options* opts /* nullable */,
                            te_trajectory** out);

typedef struct te_orbit_options {
  double orbit_tol; /* 0 -> 1e-9   */
  int max_cycles;   /* 0 -> 10000  */
  te_ode_options ode;
} te_orbit_options;

/* guess3 may be NULL (equilibrium guess from the mean temperature). On
   success fills state0[3] with the converged initial covariance and
   *cycles with the number of one-period maps evaluated. */
te_status te_find_periodic_orbit(te_model model, const te_profile* p,
                                 const te_protocol* q, const te_params* params,
                                 const double* guess3 /* nullable */,
                                 const te_orbit_options* opts /* nullable */,
                                 te_trajectory** out, double state0[3],
                                 int* cycles);

void te_trajectory_free(te_trajectory* t);
te_model te_trajectory_model(const te_trajectory* t);
/* Covariance at time t within [0, t_f]; for reduced trajectories sigma_x
   and sigma_xv are reported as NaN. */
te_status te_trajectory_eval(const te_trajectory* t, double time,
                             double out_state[3]);
double te_trajectory_begin_sigma_v(const te_trajectory* t);
double te_trajectory_end_sigma_v(const te_trajectory* t);

/* ------------------------------------------------------------------ */
/* Cycle energetics                                                    */
/* ------------------------------------------------------------------ */

typedef struct te_ledger {
  double work;
  double heat;
  double uptake;
  double dissipation;
  double power;
  double eta_U;
  double eta_Q; /* NaN unless the profile is a two-level Carnot profile */
  int has_eta_Q;
  int non_positive_uptake;
  int quasi_static;
} te_ledger;

te_status te_rates(double sigma_x, double sigma_xv, double sigma_v, double q,
                   double qdot, double T, const te_params* params,
                   double* dW_rate, double* dQ_rate);
te_status te_cycle_power(const te_trajectory* t, const te_protocol* q,
                         const te_profile* p, const te_params* params,
                         double* heat_side, double* work_side);
te_status te_cycle_ledger(const te_trajectory* t, const te_protocol* q,
                          const te_profile* p, const te_params* params,
                          te_ledger* out);
te_status te_eta_q_carnot(const te_trajectory* t, const te_protocol* q,
                          const te_profile* p, const te_params* params,
                          double* out);

/* ------------------------------------------------------------------ */
/* Monte Carlo validation                                              */
/* ------------------------------------------------------------------ */

typedef struct te_mc_stats te_mc_stats;

typedef struct te_mc_config {
  uint64_t n_particles;
  double dt;
  int n_cycles_discard;
  int n_cycles_measure;
  uint64_t seed;
  int n_threads;     /* 0 -> hardware concurrency */
  int n_stats_nodes; /* 0 -> 100 */
} te_mc_config;

/* initial3 = (sigma_x, sigma_xv, sigma_v) of the Gaussian start ensemble. */
te_status te_mc_simulate(const te_profile* p, const te_protocol* q,
                         const te_params* params, const te_mc_config* cfg,
                         const double initial3[3], te_mc_stats** out);
void te_mc_stats_free(te_mc_stats* s);

int te_mc_stats_node_count(const te_mc_stats* s);
te_status te_mc_stats_node(const te_mc_stats* s, int i, double* t, double* sx,
                           double* se_sx, double* sxv, double* se_sxv,
                           double* sv, double* se_sv);
te_status te_mc_stats_energy(const te_mc_stats* s, double* work_mean,
                             double* work_se, double* heat_mean,
                             double* heat_se, double* heat_strat_mean,
                             double* heat_strat_se, double* power_mean,
                             double* power_se);
double te_mc_stats_first_law_defect(const te_mc_stats* s);

/* residuals must have room for te_mc_stats_node_count entries. */
te_status te_mc_equipartition(const te_mc_stats* s, const te_protocol* q,
                              const te_params* params, double* residuals,
                              double* max_residual);

#ifdef __cplusplus
}
#endif

#endif /* THERMOENGINE_H */
