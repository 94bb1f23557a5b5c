#include "thermoengine/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <string>
#include <thread>

#include "thermoengine/errors.hpp"

namespace thermo {
namespace {

// ---------------------------------------------------------------------------
// Per-particle deterministic RNG: xoshiro256++ seeded through splitmix64
// from (seed, particle index), giving independent substreams.
// ---------------------------------------------------------------------------

struct SplitMix {
  std::uint64_t s;
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

struct Xoshiro {
  std::uint64_t s[4];

  static Xoshiro for_particle(std::uint64_t seed, std::uint64_t index) {
    SplitMix sm{seed ^ (0xD1B54A32D192ED03ull * (index + 1))};
    Xoshiro x;
    for (auto& w : x.s) w = sm.next();
    if ((x.s[0] | x.s[1] | x.s[2] | x.s[3]) == 0) x.s[0] = 1;
    return x;
  }

  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  double uniform() {  // (0, 1]
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }
};

struct GaussianGen {
  Xoshiro rng;
  double spare = 0.0;
  bool has_spare = false;

  double next() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    // Polar Box-Muller.
    double u, v, s;
    do {
      u = 2.0 * rng.uniform() - 1.0;
      v = 2.0 * rng.uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare = v * f;
    has_spare = true;
    return u * f;
  }
};

struct Kahan {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

// ---------------------------------------------------------------------------
// Precomputed per-step coefficient tables over one period
// ---------------------------------------------------------------------------

struct StepTables {
  std::vector<double> h;          // step sizes
  std::vector<double> q_begin;    // q at step start (right limit)
  std::vector<double> q_end;      // q at step end (left limit, same piece)
  std::vector<double> va, vb;     // v' = va*v + vb*x + noise
  std::vector<double> noise_std;  // sqrt(2 gamma k_B T dt)/m
  std::vector<double> wcoef;      // qdot * dt / 2 at step start
  std::vector<double> dq_jump;    // stiffness jump after this step (or 0)
  std::vector<double> t_bound;    // boundary times, size steps+1
  std::size_t steps = 0;
  double dt_max = 0.0;
};

StepTables build_tables(const TemperatureProfile& profile,
                        const Protocol& protocol, const EngineParams& params,
                        double dt_request) {
  StepTables tb;
  // Merge profile and protocol breakpoints.
  std::vector<double> breaks = profile.breakpoints();
  for (double b : protocol.breakpoints()) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [&](double a, double b) {
                             return b - a < 1e-12 * profile.period();
                           }),
               breaks.end());

  const double m = params.m;
  const double g = params.gamma;
  tb.t_bound.push_back(0.0);
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double len = breaks[s + 1] - breaks[s];
    const long n = std::max(1L, std::lround(std::ceil(len / dt_request)));
    const double h = len / static_cast<double>(n);
    tb.dt_max = std::max(tb.dt_max, h);
    const double pin = breaks[s] + 0.5 * len;
    for (long k = 0; k < n; ++k) {
      const double t0 = breaks[s] + k * h;
      const double t1 = (k + 1 == n) ? breaks[s + 1] : breaks[s] + (k + 1) * h;
      const double q0 = protocol.eval_pinned(t0, pin);
      const double q1 = protocol.eval_pinned(t1, pin);
      const double T0 = profile.eval_pinned(t0, pin);
      tb.h.push_back(t1 - t0);
      tb.q_begin.push_back(q0);
      tb.q_end.push_back(q1);
      tb.va.push_back(1.0 - g * (t1 - t0) / m);
      tb.vb.push_back(-q0 * (t1 - t0) / m);
      tb.noise_std.push_back(
          std::sqrt(2.0 * g * params.k_B * T0 * (t1 - t0)) / m);
      tb.wcoef.push_back(0.5 *
                         protocol.log_derivative_pinned(t0, pin) * q0 *
                         (t1 - t0));
      tb.dq_jump.push_back(0.0);
      tb.t_bound.push_back(t1);
    }
    // Stiffness jump entering the next segment (or the period wrap).
    const double q_left = tb.q_end.back();
    const double q_right = (s + 2 < breaks.size())
                               ? protocol.eval(breaks[s + 1])
                               : protocol.q_start();
    tb.dq_jump.back() = q_right - q_left;
  }
  tb.steps = tb.h.size();
  return tb;
}

struct BlockAccum {
  // Node sums over particles: x^2, xv, v^2 and their squares.
  std::vector<double> sx, sxv, sv, sx2, sxv2, sv2;
  Kahan w, w2, q, q2, qs, qs2;
  double max_defect = 0.0;
  bool unstable = false;
};

}  // namespace

EnsembleStats simulate(const TemperatureProfile& profile,
                       const Protocol& protocol, const EngineParams& params,
                       const McConfig& cfg, const CovarianceState& initial) {
  params.validate(profile);
  require(initial.is_positive_definite(), ErrorCode::InvalidArgument,
          "initial covariance must be positive definite");
  require(cfg.n_particles >= 1000, ErrorCode::InvalidArgument,
          "ensemble needs at least 10^3 particles");
  require(cfg.n_cycles_measure >= 1 && cfg.n_cycles_discard >= 0,
          ErrorCode::InvalidArgument, "cycle counts out of range");
  require(cfg.n_stats_nodes >= 2, ErrorCode::InvalidArgument,
          "need at least two stats nodes");
  const double dt_bound =
      0.01 * std::min(std::sqrt(params.m / protocol.max_q()),
                      params.m / params.gamma);
  require(cfg.dt > 0.0 && cfg.dt <= dt_bound * (1.0 + 1e-12),
          ErrorCode::InvalidArgument,
          "dt exceeds 0.01 * min(sqrt(m/q_max), m/gamma)");

  const StepTables tb = build_tables(profile, protocol, params, cfg.dt);
  const std::size_t S = tb.steps;
  const int K = cfg.n_stats_nodes;

  // Node boundaries: closest step boundary to j * t_f / K.
  std::vector<std::size_t> node_idx(K);
  std::vector<double> node_t(K);
  for (int j = 0; j < K; ++j) {
    const double target = profile.period() * j / K;
    const auto it = std::lower_bound(tb.t_bound.begin(), tb.t_bound.end(),
                                     target);
    std::size_t idx = static_cast<std::size_t>(it - tb.t_bound.begin());
    if (idx > 0 && (idx == tb.t_bound.size() ||
                    tb.t_bound[idx] - target > target - tb.t_bound[idx - 1]))
      --idx;
    node_idx[j] = idx;
    node_t[j] = tb.t_bound[idx];
  }

  // Cholesky factors of the initial covariance for Gaussian sampling.
  const double lxx = std::sqrt(initial.sigma_x);
  const double lvx = initial.sigma_xv / lxx;
  const double lvv = std::sqrt(initial.sigma_v - lvx * lvx);

  const double m = params.m;
  const double Tmax = profile.max_temperature();
  const double v_guard =
      1e6 * std::sqrt(params.k_B * Tmax / m) + 1e6 * std::sqrt(initial.sigma_v);
  const double e_floor = params.k_B * Tmax;

  const std::uint64_t n = cfg.n_particles;
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<BlockAccum> blocks(n_blocks);

  const int total_cycles = cfg.n_cycles_discard + cfg.n_cycles_measure;

  auto run_block = [&](std::uint64_t bi) {
    BlockAccum& acc = blocks[bi];
    acc.sx.assign(K, 0.0);
    acc.sxv.assign(K, 0.0);
    acc.sv.assign(K, 0.0);
    acc.sx2.assign(K, 0.0);
    acc.sxv2.assign(K, 0.0);
    acc.sv2.assign(K, 0.0);
    const std::uint64_t p0 = bi * kBlock;
    const std::uint64_t p1 = std::min(n, p0 + kBlock);
    for (std::uint64_t p = p0; p < p1; ++p) {
      GaussianGen gen{Xoshiro::for_particle(cfg.seed, p)};
      double x = 0.0, v = 0.0;
      {
        const double z1 = gen.next();
        const double z2 = gen.next();
        x = lxx * z1;
        v = lvx * z1 + lvv * z2;
      }
      Kahan w_meas, q_meas, qs_meas;  // totals over measured cycles
      double e_meas_start = 0.0;
      bool bad = false;

      for (int cyc = 0; cyc < total_cycles && !bad; ++cyc) {
        const bool measuring = cyc >= cfg.n_cycles_discard;
        const bool first_measure = cyc == cfg.n_cycles_discard;
        int next_node = 0;
        if (first_measure) {
          e_meas_start = 0.5 * m * v * v + 0.5 * tb.q_begin[0] * x * x;
        }
        for (std::size_t k = 0; k < S; ++k) {
          if (first_measure) {
            while (next_node < K && node_idx[next_node] == k) {
              const int j = next_node++;
              const double xx = x * x, vv = v * v, xv = x * v;
              acc.sx[j] += xx;
              acc.sxv[j] += xv;
              acc.sv[j] += vv;
              acc.sx2[j] += xx * xx;
              acc.sxv2[j] += xv * xv;
              acc.sv2[j] += vv * vv;
            }
          }
          const double e_pre =
              0.5 * m * v * v + 0.5 * tb.q_begin[k] * x * x;
          const double dw = tb.wcoef[k] * x * x;
          const double z = gen.next();
          const double v_old = v;
          v = tb.va[k] * v + tb.vb[k] * x + tb.noise_std[k] * z;
          x += v * tb.h[k];
          double e_post = 0.5 * m * v * v + 0.5 * tb.q_end[k] * x * x;
          if (measuring) {
            const double vbar = 0.5 * (v_old + v);
            w_meas.add(dw);
            q_meas.add(e_post - e_pre - dw);
            qs_meas.add(-params.gamma * vbar * vbar * tb.h[k] +
                        m * tb.noise_std[k] * z * vbar);
          }
          if (tb.dq_jump[k] != 0.0) {
            const double jw = 0.5 * tb.dq_jump[k] * x * x;
            if (measuring) w_meas.add(jw);  // heat unchanged across the jump
          }
          if (std::abs(v) > v_guard) {
            bad = true;
            break;
          }
        }
        if (first_measure && next_node < K) {
          // Nodes that landed exactly on the period boundary.
          while (next_node < K && node_idx[next_node] == S) {
            const int j = next_node++;
            const double xx = x * x, vv = v * v, xv = x * v;
            acc.sx[j] += xx;
            acc.sxv[j] += xv;
            acc.sv[j] += vv;
            acc.sx2[j] += xx * xx;
            acc.sxv2[j] += xv * xv;
            acc.sv2[j] += vv * vv;
          }
        }
      }
      if (bad) {
        acc.unstable = true;
        continue;
      }
      const double e_end = 0.5 * m * v * v + 0.5 * tb.q_begin[0] * x * x;
      const double de = e_end - e_meas_start;
      const double defect =
          std::abs(de - (w_meas.sum + q_meas.sum)) /
          std::max(std::abs(de), e_floor);
      acc.max_defect = std::max(acc.max_defect, defect);
      const double inv_cycles = 1.0 / cfg.n_cycles_measure;
      const double wc = w_meas.sum * inv_cycles;
      const double qc = q_meas.sum * inv_cycles;
      const double qsc = qs_meas.sum * inv_cycles;
      acc.w.add(wc);
      acc.w2.add(wc * wc);
      acc.q.add(qc);
      acc.q2.add(qc * qc);
      acc.qs.add(qsc);
      acc.qs2.add(qsc * qsc);
    }
  };

  int n_threads = cfg.n_threads > 0
                      ? cfg.n_threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  if (n_threads == 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::uint64_t b = next.fetch_add(1);
          if (b >= n_blocks) return;
          run_block(b);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // Deterministic reduction in block order.
  EnsembleStats st;
  st.node_t = node_t;
  st.mean_sx.assign(K, 0.0);
  st.se_sx.assign(K, 0.0);
  st.mean_sxv.assign(K, 0.0);
  st.se_sxv.assign(K, 0.0);
  st.mean_sv.assign(K, 0.0);
  st.se_sv.assign(K, 0.0);
  std::vector<double> sx(K, 0.0), sxv(K, 0.0), sv(K, 0.0), sx2(K, 0.0),
      sxv2(K, 0.0), sv2(K, 0.0);
  double w = 0.0, w2 = 0.0, q = 0.0, q2 = 0.0, qs = 0.0, qs2 = 0.0;
  bool unstable = false;
  for (const auto& b : blocks) {
    unstable = unstable || b.unstable;
    for (int j = 0; j < K; ++j) {
      sx[j] += b.sx[j];
      sxv[j] += b.sxv[j];
      sv[j] += b.sv[j];
      sx2[j] += b.sx2[j];
      sxv2[j] += b.sxv2[j];
      sv2[j] += b.sv2[j];
    }
    w += b.w.sum;
    w2 += b.w2.sum;
    q += b.q.sum;
    q2 += b.q2.sum;
    qs += b.qs.sum;
    qs2 += b.qs2.sum;
    st.first_law_max_rel_defect =
        std::max(st.first_law_max_rel_defect, b.max_defect);
  }
  require(!unstable, ErrorCode::UnstableStep,
          "velocity overflow guard tripped; dt is too large for this "
          "protocol");

  const double dn = static_cast<double>(n);
  auto finish = [dn](double s, double s2, double& mean, double& se) {
    mean = s / dn;
    const double var = std::max(0.0, s2 / dn - mean * mean);
    se = std::sqrt(var / dn);
  };
  for (int j = 0; j < K; ++j) {
    finish(sx[j], sx2[j], st.mean_sx[j], st.se_sx[j]);
    finish(sxv[j], sxv2[j], st.mean_sxv[j], st.se_sxv[j]);
    finish(sv[j], sv2[j], st.mean_sv[j], st.se_sv[j]);
  }
  finish(w, w2, st.work_mean, st.work_se);
  finish(q, q2, st.heat_mean, st.heat_se);
  finish(qs, qs2, st.heat_strat_mean, st.heat_strat_se);
  st.power_mean = -st.work_mean / params.t_f;
  st.power_se = st.work_se / params.t_f;
  st.n_particles = n;
  st.dt_max = tb.dt_max;
  st.seed = cfg.seed;
  return st;
}

EquipartitionDiagnostic equipartition_diagnostic(const EnsembleStats& stats,
                                                 const Protocol& protocol,
                                                 const EngineParams& params) {
  EquipartitionDiagnostic d;
  d.node_t = stats.node_t;
  d.residual.resize(stats.node_t.size());
  for (std::size_t j = 0; j < stats.node_t.size(); ++j) {
    const double q = protocol.eval(stats.node_t[j]);
    const double r = std::abs(q * stats.mean_sx[j] -
                              params.m * stats.mean_sv[j]) /
                     (params.m * stats.mean_sv[j]);
    d.residual[j] = r;
    d.max_residual = std::max(d.max_residual, r);
  }
  return d;
}

}  // namespace thermo
