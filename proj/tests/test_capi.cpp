// Exercises the shared-library C surface end to end: object lifecycles,
// error-code mapping, and numeric parity with the reference values used in
// the C++ unit tests.

#include <thermoengine.h>

#include <cmath>
#include <cstdio>
#include <cstring>

static int failures = 0;

#define CHECK(cond)                                                       \
  do {                                                                    \
    if (!(cond)) {                                                        \
      std::fprintf(stderr, "[FAIL] %s:%d  %s\n", __FILE__, __LINE__,      \
                   #cond);                                                \
      ++failures;                                                         \
    }                                                                     \
  } while (0)

#define CHECK_NEAR(a, b, tol)                                             \
  do {                                                                    \
    const double va = (a), vb = (b);                                      \
    if (!(std::fabs(va - vb) <= (tol) * std::max(1.0, std::fabs(vb)))) {  \
      std::fprintf(stderr, "[FAIL] %s:%d  %s = %.17g vs %.17g\n",         \
                   __FILE__, __LINE__, #a, va, vb);                       \
      ++failures;                                                         \
    }                                                                     \
  } while (0)

static double sqrt_of(double T, void*) { return std::sqrt(T); }

int main() {
  CHECK(std::strlen(te_version()) > 0);

  // Builder round trip: Carnot profile assembled piece by piece.
  te_profile* carnot = nullptr;
  {
    te_profile_builder* b = te_profile_builder_new(1.0);
    CHECK(te_profile_builder_add_constant(b, 0.0, 0.5, 4.0) == TE_OK);
    CHECK(te_profile_builder_add_constant(b, 0.5, 1.0, 1.0) == TE_OK);
    CHECK(te_profile_builder_finish(b, &carnot) == TE_OK);
  }
  CHECK(carnot != nullptr);
  CHECK_NEAR(te_profile_eval(carnot, 0.25), 4.0, 1e-14);
  CHECK_NEAR(te_profile_eval(carnot, 0.5), 1.0, 1e-14);
  CHECK(te_profile_jump_count(carnot) == 1);
  CHECK_NEAR(te_profile_jump_time(carnot, 0), 0.5, 1e-14);

  // Invalid profile -> error code plus message.
  {
    te_profile_builder* b = te_profile_builder_new(1.0);
    te_profile_builder_add_constant(b, 0.0, 1.0, -2.0);
    te_profile* bad = nullptr;
    CHECK(te_profile_builder_finish(b, &bad) == TE_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(te_last_error()) > 0);
  }

  te_moments m{};
  CHECK(te_profile_moments(carnot, &m) == TE_OK);
  CHECK_NEAR(m.mean_T, 2.5, 1e-13);
  CHECK_NEAR(m.mean_sqrtT, 1.5, 1e-13);
  CHECK_NEAR(m.var_sqrtT, 0.25, 1e-13);

  double integral = 0.0;
  CHECK(te_profile_integrate(carnot, sqrt_of, nullptr, 0.0, 1.0, &integral) ==
        TE_OK);
  CHECK_NEAR(integral, 1.5, 1e-12);

  te_params params{1.0, 1.0, 1.0, 1.0, 100.0};
  CHECK(te_params_validate(&params, carnot) == TE_OK);
  CHECK_NEAR(te_default_q0(1.0, 1.0, 0.0), 1e4, 1e-12);

  double p_star = 0.0;
  CHECK(te_max_power_value(carnot, &params, &p_star) == TE_OK);
  CHECK_NEAR(p_star, 0.25, 1e-12);

  double eta_mp = 0.0;
  CHECK(te_efficiency_at_max_power(carnot, &eta_mp) == TE_OK);
  CHECK_NEAR(eta_mp, 0.5, 1e-12);

  double mu = 0.0;
  CHECK(te_solve_mu(carnot, &params, 0.125, &mu) == TE_OK);
  CHECK_NEAR(mu, 0.7742309379904895, 1e-8);
  CHECK(te_solve_mu(carnot, &params, 0.30, &mu) ==
        TE_ERR_POWER_OUT_OF_RANGE);

  double eta = 0.0;
  CHECK(te_max_efficiency_at_power(carnot, &params, 0.125, &eta) == TE_OK);
  CHECK_NEAR(eta, 0.8435921354681398, 1e-8);

  te_sigma* sigma = nullptr;
  CHECK(te_max_power_sigma(carnot, &params, &sigma) == TE_OK);
  CHECK_NEAR(te_sigma_eval(sigma, 0.25), 3.0, 1e-12);
  CHECK(std::isnan(te_sigma_mu(sigma)));

  te_sigma* sigma_fp = nullptr;
  CHECK(te_fixed_power_sigma(carnot, &params, 0.125, &sigma_fp) == TE_OK);
  CHECK_NEAR(te_sigma_mu(sigma_fp), 0.7742309379904895, 1e-8);

  te_protocol* proto = nullptr;
  CHECK(te_max_power_protocol(carnot, &params, &proto) == TE_OK);
  CHECK_NEAR(te_protocol_eval(proto, 0.0), 100.0, 1e-12);
  CHECK(te_protocol_min_q(proto) > 0.0);
  CHECK(te_frequency_ratio(proto, &params) > 0.0);

  // Reduced integration from the synthesized start closes the cycle.
  te_trajectory* traj = nullptr;
  CHECK(te_integrate_reduced(carnot, proto, &params, 3.0, nullptr, &traj) ==
        TE_OK);
  CHECK(te_trajectory_model(traj) == TE_MODEL_REDUCED);
  CHECK_NEAR(te_trajectory_end_sigma_v(traj), 3.0, 1e-7);
  double state[3] = {0, 0, 0};
  CHECK(te_trajectory_eval(traj, 0.25, state) == TE_OK);
  CHECK(std::isnan(state[0]));
  CHECK_NEAR(state[2], 3.0, 1e-7);

  double heat_side = 0.0, work_side = 0.0;
  CHECK(te_cycle_power(traj, proto, carnot, &params, &heat_side,
                       &work_side) == TE_OK);
  CHECK_NEAR(heat_side, 0.25, 1e-5);

  te_ledger ledger{};
  CHECK(te_cycle_ledger(traj, proto, carnot, &params, &ledger) == TE_OK);
  CHECK_NEAR(ledger.eta_U, 0.5, 1e-5);
  CHECK(ledger.has_eta_Q == 1);
  CHECK_NEAR(ledger.eta_Q, 0.5, 1e-5);

  double eta_q = 0.0;
  CHECK(te_eta_q_carnot(traj, proto, carnot, &params, &eta_q) == TE_OK);
  CHECK_NEAR(eta_q, 0.5, 1e-5);

  // Full-model periodic orbit through the C surface.
  te_trajectory* orbit = nullptr;
  double state0[3] = {0, 0, 0};
  int cycles = 0;
  te_params strong = params;
  strong.gamma = 4.0;
  strong.q0 = 1e4;
  CHECK(te_find_periodic_orbit(TE_MODEL_FULL, carnot, proto, &strong, nullptr,
                               nullptr, &orbit, state0, &cycles) == TE_OK);
  CHECK(cycles > 0);
  CHECK(state0[0] > 0.0);
  CHECK(te_trajectory_model(orbit) == TE_MODEL_FULL);

  // Rates sanity.
  double dw = 0.0, dq = 0.0;
  CHECK(te_rates(0.04, 0.0, 4.0, 100.0, 0.0, 2.0, &params, &dw, &dq) ==
        TE_OK);
  CHECK_NEAR(dq, -2.0, 1e-13);

  // eta_Q guard on a non-two-level profile.
  te_profile* sine = nullptr;
  CHECK(te_profile_sinusoid(2.5, 1.5, 1.0, 0.0, &sine) == TE_OK);
  te_params sine_params = params;
  te_protocol* sine_proto = nullptr;
  CHECK(te_max_power_protocol(sine, &sine_params, &sine_proto) == TE_OK);
  te_trajectory* sine_orbit = nullptr;
  CHECK(te_find_periodic_orbit(TE_MODEL_REDUCED, sine, sine_proto,
                               &sine_params, nullptr, nullptr, &sine_orbit,
                               state0, &cycles) == TE_OK);
  double unused = 0.0;
  CHECK(te_eta_q_carnot(sine_orbit, sine_proto, sine, &sine_params,
                        &unused) == TE_ERR_NOT_CARNOT_PROFILE);

  // Monte Carlo smoke test with deterministic reruns.
  {
    te_profile* flat = nullptr;
    CHECK(te_profile_constant(2.0, 1.0, &flat) == TE_OK);
    te_protocol* hold = nullptr;
    CHECK(te_constant_protocol(100.0, 1.0, &hold) == TE_OK);
    te_params mc_params{1.0, 1.0, 1.0, 1.0, 100.0};
    te_mc_config cfg{};
    cfg.n_particles = 2000;
    cfg.dt = 1e-3;
    cfg.n_cycles_discard = 0;
    cfg.n_cycles_measure = 1;
    cfg.seed = 9;
    cfg.n_threads = 2;
    cfg.n_stats_nodes = 8;
    const double init[3] = {0.02, 0.0, 2.0};
    te_mc_stats* s1 = nullptr;
    te_mc_stats* s2 = nullptr;
    CHECK(te_mc_simulate(flat, hold, &mc_params, &cfg, init, &s1) == TE_OK);
    cfg.n_threads = 1;
    CHECK(te_mc_simulate(flat, hold, &mc_params, &cfg, init, &s2) == TE_OK);
    CHECK(te_mc_stats_node_count(s1) == 8);
    double t1, sx1, sesx1, sxv1, sesxv1, sv1, sesv1;
    double t2, sx2, sesx2, sxv2, sesxv2, sv2, sesv2;
    for (int i = 0; i < 8; ++i) {
      CHECK(te_mc_stats_node(s1, i, &t1, &sx1, &sesx1, &sxv1, &sesxv1, &sv1,
                             &sesv1) == TE_OK);
      CHECK(te_mc_stats_node(s2, i, &t2, &sx2, &sesx2, &sxv2, &sesxv2, &sv2,
                             &sesv2) == TE_OK);
      CHECK(t1 == t2);
      CHECK(sv1 == sv2);
      CHECK(sx1 == sx2);
    }
    double w1, wse1, h1, hse1, hs1, hsse1, p1, pse1;
    CHECK(te_mc_stats_energy(s1, &w1, &wse1, &h1, &hse1, &hs1, &hsse1, &p1,
                             &pse1) == TE_OK);
    CHECK(te_mc_stats_first_law_defect(s1) < 1e-10);
    double residuals[8];
    double max_resid = 0.0;
    CHECK(te_mc_equipartition(s1, hold, &mc_params, residuals, &max_resid) ==
          TE_OK);
    CHECK(max_resid < 0.2);
    te_mc_stats_free(s1);
    te_mc_stats_free(s2);
    te_protocol_free(hold);
    te_profile_free(flat);
  }

  te_trajectory_free(sine_orbit);
  te_protocol_free(sine_proto);
  te_profile_free(sine);
  te_trajectory_free(orbit);
  te_trajectory_free(traj);
  te_protocol_free(proto);
  te_sigma_free(sigma);
  te_sigma_free(sigma_fp);
  te_profile_free(carnot);

  if (failures == 0) std::printf("test_capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
