// polyret: command-line front end.
//
// Subcommands:
//   solve     run one recovery instance and print NMSE + diagnostics
//   sweep     Monte Carlo sweep over (alpha, rho) grids, CSV/JSONL output
//   theory    export the asymptotic curves and boundaries as CSV
//   geometry  empirical feasibility-set geometry check
//   selftest  run the acceptance suite
//
// A config file (INI-style key=value, see --config) supplies defaults that
// command-line flags override. Exit codes: 0 success, 1 usage error,
// 2 experiment-level failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "polyret/harness.hpp"
#include "polyret/selftest.hpp"

namespace {

using namespace polyret;

struct CliOptions {
  std::string algorithm = "phasemax";
  std::string kind = "gaussian-real";
  std::string init = "cosine";
  std::string omega = "y2";
  std::string out;
  std::string format = "csv";
  std::size_t n = 200;
  std::vector<double> alphas{4.0};
  std::vector<double> rhos{0.6};
  int trials = 10;
  std::uint64_t seed = 1;
  double tol_feas = 1e-9;
  double tol_stat = 1e-8;
  std::size_t solver_max_iters = 0;
  int max_outer = 25;
  double eps_step = 1e-4;
  int wf_steps = 2000;
  double wf_step_size = 0;
  int spectral_iters = 300;
};

ExperimentConfig to_config(const CliOptions& o) {
  ExperimentConfig cfg;
  cfg.algorithm = algorithm_from_string(o.algorithm);
  cfg.kind = kind_from_string(o.kind);
  cfg.init = init_from_string(o.init);
  cfg.omega = o.omega;
  cfg.n = o.n;
  cfg.alpha_grid = o.alphas;
  cfg.rho_grid = o.rhos;
  cfg.trials = o.trials;
  cfg.master_seed = o.seed;
  cfg.tol_feas = o.tol_feas;
  cfg.tol_stat = o.tol_stat;
  cfg.solver_max_iters = o.solver_max_iters;
  cfg.max_outer = o.max_outer;
  cfg.eps_step = o.eps_step;
  cfg.wf_steps = o.wf_steps;
  cfg.wf_step_size = o.wf_step_size;
  cfg.spectral_iters = o.spectral_iters;
  return cfg;
}

void add_common_flags(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--algorithm", o.algorithm,
                  "phasemax | phaselamp | wphaselamp | wirtingerflow");
  cmd->add_option("--kind", o.kind,
                  "gaussian-real | gaussian-complex | coded-diffraction");
  cmd->add_option("--init", o.init, "cosine | spectral | random");
  cmd->add_option("--omega", o.omega, "preprocessing function (y2 | y2-trunc)");
  cmd->add_option("--n", o.n, "signal dimension");
  cmd->add_option("--alpha", o.alphas, "oversampling ratio(s)")->delimiter(',');
  cmd->add_option("--rho", o.rhos, "target input cosine(s), cosine init mode")
      ->delimiter(',');
  cmd->add_option("--trials", o.trials, "Monte Carlo trials per grid point");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--tol-feas", o.tol_feas, "solver feasibility tolerance");
  cmd->add_option("--tol-stat", o.tol_stat, "solver stationarity tolerance");
  cmd->add_option("--solver-max-iters", o.solver_max_iters,
                  "inner iteration cap (0 = 50n)");
  cmd->add_option("--max-outer", o.max_outer, "outer iteration cap");
  cmd->add_option("--eps-step", o.eps_step, "outer step tolerance");
  cmd->add_option("--wf-steps", o.wf_steps, "gradient-descent steps");
  cmd->add_option("--wf-step-size", o.wf_step_size,
                  "gradient step size (0 = auto)");
  cmd->add_option("--spectral-iters", o.spectral_iters,
                  "power-iteration budget for spectral init");
  cmd->set_config("--config", "", "INI config file; flags override its values");
}

int cmd_solve(const CliOptions& o) {
  ExperimentConfig cfg = to_config(o);
  cfg.trials = 1;
  cfg.alpha_grid = {o.alphas.front()};
  if (cfg.init == InitMode::Cosine) cfg.rho_grid = {o.rhos.front()};
  cfg.validate();
  auto recs = run_sweep(cfg);
  const TrialRecord& r = recs.front();
  std::printf("algorithm            %s\n", to_string(r.algorithm));
  std::printf("ensemble             %s, n=%zu, m=%zu (alpha=%g)\n",
              to_string(cfg.kind), r.n, r.m, r.alpha);
  std::printf("rho_init requested   %g\n", r.rho_init_requested);
  std::printf("rho_init measured    %.12f\n", r.rho_init_measured);
  std::printf("NMSE                 %.12e\n", r.nmse);
  std::printf("outer iterations     %zu\n", r.outer_iterations);
  std::printf("converged            %s\n", r.converged ? "yes" : "no");
  std::printf("wall time            %.1f ms\n", r.wall_ms);
  return std::isfinite(r.nmse) ? 0 : 2;
}

int cmd_sweep(const CliOptions& o) {
  ExperimentConfig cfg = to_config(o);
  cfg.validate();
  auto recs = run_sweep(cfg);
  std::size_t failures = 0;
  for (const auto& r : recs)
    if (!std::isfinite(r.nmse)) ++failures;
  auto emit = [&](std::ostream& os) {
    if (o.format == "jsonl")
      write_jsonl(recs, os);
    else
      write_csv(recs, os);
  };
  if (o.out.empty()) {
    emit(std::cout);
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot open output file " << o.out << "\n";
      return 2;
    }
    emit(f);
    std::cerr << recs.size() << " rows written to " << o.out << "\n";
  }
  return failures == recs.size() ? 2 : 0;
}

int cmd_theory(const CliOptions& o) {
  if (o.out.empty()) {
    export_theory(o.alphas, o.rhos, std::cout);
    return 0;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open output file " << o.out << "\n";
    return 2;
  }
  export_theory(o.alphas, o.rhos, f);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase retrieval by polytope optimization"};
  app.require_subcommand(1);

  CliOptions o;
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "run one instance, print diagnostics");
  add_common_flags(solve_cmd, o);
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Monte Carlo sweep, rows to CSV/JSONL");
  add_common_flags(sweep_cmd, o);
  sweep_cmd->add_option("--out", o.out, "output file (default: stdout)");
  sweep_cmd->add_option("--format", o.format, "csv | jsonl");
  CLI::App* theory_cmd =
      app.add_subcommand("theory", "export asymptotic curves as CSV");
  theory_cmd->add_option("--alpha", o.alphas, "alpha grid (all > 2)")->delimiter(',');
  theory_cmd->add_option("--rho", o.rhos, "rho grid")->delimiter(',');
  theory_cmd->add_option("--out", o.out, "output file (default: stdout)");
  theory_cmd->set_config("--config");

  CLI::App* geom_cmd = app.add_subcommand(
      "geometry", "empirical feasibility-geometry check");
  std::size_t g_n = 1000, g_samples = 200;
  double g_alpha = 6.0, g_eps = 0.05;
  std::uint64_t g_seed = 1;
  geom_cmd->add_option("--n", g_n, "signal dimension");
  geom_cmd->add_option("--alpha", g_alpha, "oversampling ratio");
  geom_cmd->add_option("--samples", g_samples, "boundary samples");
  geom_cmd->add_option("--eps", g_eps, "region inflation");
  geom_cmd->add_option("--seed", g_seed, "seed");

  CLI::App* self_cmd = app.add_subcommand("selftest", "run acceptance suite");
  std::vector<int> only_criteria;
  self_cmd->add_option("--criteria", only_criteria,
                       "subset of criterion ids (default: all)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(o);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
    if (theory_cmd->parsed()) return cmd_theory(o);
    if (geom_cmd->parsed()) {
      auto rep = check_feasibility_geometry(g_n, g_alpha, g_samples, g_eps,
                                            g_seed);
      std::printf("samples             %zu\n", rep.samples);
      std::printf("violations          %zu\n", rep.violations);
      std::printf("violation fraction  %.4f\n", rep.violation_fraction);
      std::printf("max excess          %.6g\n", rep.max_excess);
      return 0;
    }
    if (self_cmd->parsed())
      return selftest::run_and_report(std::cout, only_criteria) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
