// Monte Carlo experiment engine: seeded sweeps over (algorithm, alpha, rho),
// theory-curve export, and an empirical check of the feasibility-set
// geometry. Per-trial randomness is a pure function of
// (master_seed, alpha_index, rho_index, trial_index), so results are
// independent of execution order and worker count; rows are emitted in
// canonical grid order.
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "polyret/algorithms.hpp"
#include "polyret/ensemble.hpp"
#include "polyret/metrics.hpp"
#include "polyret/solver.hpp"
#include "polyret/spectral.hpp"
#include "polyret/theory.hpp"

namespace polyret {

enum class Algorithm { PhaseMax, PhaseLamp, WPhaseLamp, WirtingerFlow };
enum class InitMode { Cosine, Spectral, Random };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::PhaseMax: return "phasemax";
    case Algorithm::PhaseLamp: return "phaselamp";
    case Algorithm::WPhaseLamp: return "wphaselamp";
    case Algorithm::WirtingerFlow: return "wirtingerflow";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "phasemax") return Algorithm::PhaseMax;
  if (s == "phaselamp") return Algorithm::PhaseLamp;
  if (s == "wphaselamp") return Algorithm::WPhaseLamp;
  if (s == "wirtingerflow" || s == "wf") return Algorithm::WirtingerFlow;
  throw std::invalid_argument("unknown algorithm: " + s);
}

inline EnsembleKind kind_from_string(const std::string& s) {
  if (s == "gaussian-real" || s == "real") return EnsembleKind::GaussianReal;
  if (s == "gaussian-complex" || s == "complex")
    return EnsembleKind::GaussianComplex;
  if (s == "coded-diffraction" || s == "cdp")
    return EnsembleKind::CodedDiffraction;
  throw std::invalid_argument("unknown ensemble kind: " + s);
}

inline InitMode init_from_string(const std::string& s) {
  if (s == "cosine") return InitMode::Cosine;
  if (s == "spectral") return InitMode::Spectral;
  if (s == "random") return InitMode::Random;
  throw std::invalid_argument("unknown init mode: " + s);
}

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::PhaseMax;
  EnsembleKind kind = EnsembleKind::GaussianReal;
  std::size_t n = 200;
  std::vector<double> alpha_grid{4.0};
  std::vector<double> rho_grid{0.6};  // cosine mode only
  InitMode init = InitMode::Cosine;
  int trials = 10;
  std::uint64_t master_seed = 1;
  double tol_feas = 1e-9;
  double tol_stat = 1e-8;
  std::size_t solver_max_iters = 0;  // 0 -> 50 n
  int max_outer = 25;                // outer-iteration cap of the iterative schemes
  double eps_step = 1e-4;
  std::string omega = "y2";
  int wf_steps = 2000;
  double wf_step_size = 0;           // 0 -> default
  int spectral_iters = 300;

  void validate() const {
    require(n >= 1, "config: n must be >= 1");
    require(!alpha_grid.empty(), "config: alpha grid must be nonempty");
    require(init != InitMode::Cosine || !rho_grid.empty(),
            "config: rho grid must be nonempty in cosine mode");
    require(trials >= 1, "config: trials must be >= 1");
    require(tol_feas > 0 && tol_stat > 0, "config: tolerances must be > 0");
    require(max_outer >= 1 && wf_steps >= 1, "config: iteration caps must be >= 1");
    for (double r : rho_grid)
      require(r >= 0 && r <= 1, "config: rho values must lie in [0,1]");
  }

  // Grid actually iterated over: a single placeholder entry when the init
  // mode does not take a target cosine.
  std::vector<double> effective_rho_grid() const {
    if (init == InitMode::Cosine) return rho_grid;
    return {std::numeric_limits<double>::quiet_NaN()};
  }
};

struct TrialRecord {
  Algorithm algorithm = Algorithm::PhaseMax;
  std::size_t n = 0;
  std::size_t m = 0;
  double alpha = 0;
  double rho_init_requested = std::numeric_limits<double>::quiet_NaN();
  double rho_init_measured = 0;
  std::uint64_t seed = 0;
  double nmse = 0;
  std::size_t outer_iterations = 0;
  bool converged = false;
  double wall_ms = 0;
};

inline unsigned harness_threads() {
  if (const char* env = std::getenv("POLYRET_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

namespace detail {

template <typename S>
TrialRecord run_trial(const ExperimentConfig& cfg, double alpha, double rho,
                      std::size_t alpha_idx, std::size_t rho_idx,
                      std::size_t trial_idx) {
  TrialRecord rec;
  rec.algorithm = cfg.algorithm;
  rec.n = cfg.n;
  rec.alpha = alpha;
  rec.rho_init_requested = rho;
  rec.seed = mix_keys(cfg.master_seed, alpha_idx, rho_idx, trial_idx);
  auto t0 = std::chrono::steady_clock::now();
  try {
    auto ensemble =
        make_ensemble<S>(cfg.kind, cfg.n, alpha, mix_keys(rec.seed, 0x656eULL));
    rec.m = ensemble.rows;
    Rng sig_rng = Rng::stream(rec.seed, 0x736967ULL);
    Signal<S> xi = sig_rng.template normal_vector<S>(cfg.n);
    auto y = measure(ensemble, xi);

    Signal<S> x_init;
    switch (cfg.init) {
      case InitMode::Cosine:
        x_init = make_init(xi, rho, mix_keys(rec.seed, 0x696eULL)).x_init;
        break;
      case InitMode::Random: {
        Rng init_rng = Rng::stream(rec.seed, 0x726e64ULL);
        x_init = init_rng.template normal_vector<S>(cfg.n);
        normalize(x_init);
        break;
      }
      case InitMode::Spectral: {
        auto omega = make_omega(cfg.omega, y);
        x_init = spectral_init(ensemble, y, omega, cfg.spectral_iters,
                               mix_keys(rec.seed, 0x7370ULL), &xi)
                     .x_init;
        break;
      }
    }
    rec.rho_init_measured = cosine_similarity(x_init, xi);

    AlgoOptions<S> opts;
    opts.tol_feas = cfg.tol_feas;
    opts.tol_stat = cfg.tol_stat;
    opts.solver_max_iters = cfg.solver_max_iters;

    RecoveryResult<S> result;
    switch (cfg.algorithm) {
      case Algorithm::PhaseMax:
        result = phasemax(ensemble, y, x_init, opts);
        break;
      case Algorithm::PhaseLamp:
        result = phaselamp(ensemble, y, x_init, cfg.max_outer, cfg.eps_step, opts);
        break;
      case Algorithm::WPhaseLamp: {
        auto omega = make_omega(cfg.omega, y);
        result = wphaselamp(ensemble, y, x_init, omega, cfg.max_outer,
                            cfg.eps_step, opts);
        break;
      }
      case Algorithm::WirtingerFlow:
        result = wirtinger_flow(ensemble, y, x_init, cfg.wf_steps,
                                cfg.wf_step_size);
        break;
    }
    rec.nmse = nmse(result.x_hat, xi);
    rec.outer_iterations = result.outer_iterations;
    rec.converged = result.terminated_by != Termination::SolverFailure;
  } catch (const std::exception&) {
    rec.converged = false;
    rec.nmse = std::numeric_limits<double>::infinity();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rec;
}

}  // namespace detail

inline std::vector<TrialRecord> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> rhos = cfg.effective_rho_grid();
  const std::size_t total =
      cfg.alpha_grid.size() * rhos.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<TrialRecord> records(total);

  auto run_one = [&](std::size_t flat) {
    std::size_t t = flat % static_cast<std::size_t>(cfg.trials);
    std::size_t rest = flat / static_cast<std::size_t>(cfg.trials);
    std::size_t ri = rest % rhos.size();
    std::size_t ai = rest / rhos.size();
    auto trial = [&](auto tag) {
      using S = decltype(tag);
      records[flat] = detail::run_trial<S>(cfg, cfg.alpha_grid[ai], rhos[ri],
                                           ai, ri, t);
    };
    if (cfg.kind == EnsembleKind::GaussianReal)
      trial(double{});
    else
      trial(cxd{});
  };

  unsigned workers = std::min<unsigned>(harness_threads(),
                                        static_cast<unsigned>(total));
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < total;
             i = next.fetch_add(1))
          run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return records;
}

// --- persistence -------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_csv(const std::vector<TrialRecord>& records, std::ostream& os) {
  os << "algorithm,n,m,alpha,rho_init_requested,rho_init_measured,seed,nmse,"
        "outer_iterations,converged,wall_ms\n";
  for (const auto& r : records) {
    os << to_string(r.algorithm) << ',' << r.n << ',' << r.m << ','
       << detail::fmt_double(r.alpha) << ','
       << detail::fmt_double(r.rho_init_requested) << ','
       << detail::fmt_double(r.rho_init_measured) << ',' << r.seed << ','
       << detail::fmt_double(r.nmse) << ',' << r.outer_iterations << ','
       << (r.converged ? 1 : 0) << ',' << detail::fmt_double(r.wall_ms) << '\n';
  }
}

inline void write_jsonl(const std::vector<TrialRecord>& records,
                        std::ostream& os) {
  for (const auto& r : records) {
    os << "{\"algorithm\":\"" << to_string(r.algorithm) << "\",\"n\":" << r.n
       << ",\"m\":" << r.m << ",\"alpha\":" << detail::fmt_double(r.alpha)
       << ",\"rho_init_requested\":" << detail::fmt_double(r.rho_init_requested)
       << ",\"rho_init_measured\":" << detail::fmt_double(r.rho_init_measured)
       << ",\"seed\":" << r.seed << ",\"nmse\":" << detail::fmt_double(r.nmse)
       << ",\"outer_iterations\":" << r.outer_iterations
       << ",\"converged\":" << (r.converged ? "true" : "false")
       << ",\"wall_ms\":" << detail::fmt_double(r.wall_ms) << "}\n";
  }
}

// Theory curves on a grid. Columns: the per-point asymptotics plus the four
// boundary curves; their pairwise orderings are re-asserted on every row.
inline void export_theory(const std::vector<double>& alpha_grid,
                          const std::vector<double>& rho_grid,
                          std::ostream& os) {
  require(!alpha_grid.empty() && !rho_grid.empty(),
          "export_theory: empty grid");
  os << "alpha,rho,s_star,r_star,nmse_pred,rho_c,rho_hat_s,rho_s_indep,"
        "c_star_suff,prior_bound\n";
  for (double a : alpha_grid) {
    theory::AlphaContext ctx(a);
    double rc = theory::rho_c(a);
    double rhs = theory::rho_hat_s(a);
    double rsi = theory::rho_s_independent(a);
    double css = theory::c_star_sufficient_cosine(a);
    if (!(rsi <= rhs + 1e-12) || !(rc <= css + 1e-12))
      throw std::logic_error("export_theory: boundary ordering violated");
    for (double rho : rho_grid) {
      auto p = theory::predict_nmse(ctx, rho);
      os << detail::fmt_double(a) << ',' << detail::fmt_double(rho) << ','
         << detail::fmt_double(p.s_star) << ',' << detail::fmt_double(p.r_star)
         << ',' << detail::fmt_double(p.nmse_pred) << ','
         << detail::fmt_double(rc) << ',' << detail::fmt_double(rhs) << ','
         << detail::fmt_double(rsi) << ',' << detail::fmt_double(css) << ','
         << detail::fmt_double(theory::prior_sufficient_alpha(rho)) << '\n';
    }
  }
}

// --- feasibility geometry ----------------------------------------------------

struct GeometryReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double violation_fraction = 0;
  double max_excess = 0;  // max over samples of alpha*c_d(s,r) - r^2
};

// Draws random directions, walks each to the feasibility boundary of the
// polytope by bisection along the ray, projects the boundary point to
// (s, r) = (x_1, ||x_tilde||), and checks alpha * c_d(s, r) <= r^2 + eps.
// The target here is e_1, so the projection is literal.
inline GeometryReport check_feasibility_geometry(std::size_t n, double alpha,
                                                 std::size_t samples, double eps,
                                                 std::uint64_t seed) {
  require(eps > 0, "check_feasibility_geometry: eps must be > 0");
  require(samples >= 1, "check_feasibility_geometry: samples must be >= 1");
  auto ensemble = make_ensemble<double>(EnsembleKind::GaussianReal, n, alpha,
                                        mix_keys(seed, 0x67656fULL));
  Signal<double> xi(n, 0.0);
  xi[0] = 1.0;
  auto y = measure(ensemble, xi);

  GeometryReport rep;
  rep.samples = samples;
  Signal<double> z;
  for (std::size_t s_idx = 0; s_idx < samples; ++s_idx) {
    Rng rng = Rng::stream(seed, 0x646972ULL, s_idx);
    Signal<double> d = rng.normal_vector<double>(n);
    normalize(d);
    ensemble.apply(d, z);
    // t * d is feasible iff t*|z_i| <= y_i for all i.
    auto feasible = [&](double t) {
      for (std::size_t i = 0; i < z.size(); ++i)
        if (t * std::abs(z[i]) > y[i]) return false;
      return true;
    };
    double lo = 0.0, hi = 1.0;
    int grow = 0;
    while (feasible(hi) && ++grow < 200) hi *= 2.0;
    if (grow >= 200) continue;  // degenerate ray
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    double t = lo;
    double s = t * d[0];
    double rsq = t * t - s * s;
    double r = std::sqrt(rsq < 0 ? 0.0 : rsq);
    double excess = alpha * theory::c_d(s, r) - r * r;
    rep.max_excess = std::max(rep.max_excess, excess);
    if (excess > eps) ++rep.violations;
  }
  rep.violation_fraction =
      static_cast<double>(rep.violations) / static_cast<double>(rep.samples);
  return rep;
}

}  // namespace polyret
