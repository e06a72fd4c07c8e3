#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>

#include "polyret/harness.hpp"

using namespace polyret;

namespace {

// CSV minus the trailing wall-time column (the one timing-dependent field).
std::string strip_wall_ms(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    auto pos = line.rfind(',');
    out << line.substr(0, pos) << '\n';
  }
  return out.str();
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::PhaseMax;
  cfg.n = 60;
  cfg.alpha_grid = {4.0};
  cfg.rho_grid = {0.3, 0.8};
  cfg.trials = 3;
  cfg.master_seed = 42;
  cfg.tol_feas = 1e-8;
  cfg.tol_stat = 1e-6;
  cfg.solver_max_iters = 4000;
  return cfg;
}

}  // namespace

TEST_CASE("sweep rows are deterministic and grid-ordered") {
  auto cfg = small_config();
  auto r1 = run_sweep(cfg);
  auto r2 = run_sweep(cfg);
  REQUIRE(r1.size() == 6);
  std::ostringstream c1, c2;
  write_csv(r1, c1);
  write_csv(r2, c2);
  REQUIRE(strip_wall_ms(c1.str()) == strip_wall_ms(c2.str()));

  // canonical ordering: rho index advances before alpha, trials innermost
  REQUIRE(r1[0].rho_init_requested == 0.3);
  REQUIRE(r1[3].rho_init_requested == 0.8);
  for (const auto& r : r1) {
    REQUIRE(r.m == 240);
    REQUIRE(r.nmse >= 0.0);
    REQUIRE(std::abs(r.rho_init_measured - r.rho_init_requested) < 1e-9);
  }
}

TEST_CASE("sweep is independent of the worker count") {
  auto cfg = small_config();
  setenv("POLYRET_THREADS", "1", 1);
  auto serial = run_sweep(cfg);
  setenv("POLYRET_THREADS", "4", 1);
  auto parallel = run_sweep(cfg);
  unsetenv("POLYRET_THREADS");
  std::ostringstream a, b;
  write_csv(serial, a);
  write_csv(parallel, b);
  REQUIRE(strip_wall_ms(a.str()) == strip_wall_ms(b.str()));
}

TEST_CASE("above-transition rows recover, below-transition rows do not") {
  auto cfg = small_config();
  cfg.n = 150;
  cfg.trials = 4;
  auto recs = run_sweep(cfg);
  int hi_succ = 0, lo_succ = 0;
  for (const auto& r : recs) {
    if (r.rho_init_requested > 0.5) hi_succ += r.nmse < 1e-4;
    else lo_succ += r.nmse < 1e-4;
  }
  REQUIRE(hi_succ >= 3);  // rho = 0.8 > rho_c(4) = 0.463
  REQUIRE(lo_succ <= 1);  // rho = 0.3 < rho_c(4)
}

TEST_CASE("trial failures are recorded, not fatal") {
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::PhaseMax;
  cfg.kind = EnsembleKind::CodedDiffraction;
  cfg.n = 8;
  cfg.alpha_grid = {2.5};  // invalid pattern count: every trial fails
  cfg.rho_grid = {0.5};
  cfg.trials = 3;
  auto recs = run_sweep(cfg);
  REQUIRE(recs.size() == 3);
  for (const auto& r : recs) {
    REQUIRE_FALSE(r.converged);
    REQUIRE(std::isinf(r.nmse));
  }
}

TEST_CASE("csv round-trips doubles exactly") {
  auto cfg = small_config();
  cfg.trials = 2;
  cfg.rho_grid = {1.0 / 3.0};
  auto recs = run_sweep(cfg);
  std::ostringstream os;
  write_csv(recs, os);
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  REQUIRE(header ==
          "algorithm,n,m,alpha,rho_init_requested,rho_init_measured,seed,nmse,"
          "outer_iterations,converged,wall_ms");
  std::size_t row = 0;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 11);
    REQUIRE(std::stod(cells[4]) == recs[row].rho_init_requested);
    REQUIRE(std::stod(cells[5]) == recs[row].rho_init_measured);
    REQUIRE(std::stod(cells[7]) == recs[row].nmse);
    REQUIRE(std::stoull(cells[6]) == recs[row].seed);
    ++row;
  }
  REQUIRE(row == recs.size());
}

TEST_CASE("jsonl rows mirror the csv records") {
  auto cfg = small_config();
  cfg.trials = 1;
  cfg.rho_grid = {0.7};
  auto recs = run_sweep(cfg);
  std::ostringstream os;
  write_jsonl(recs, os);
  std::string line = os.str();
  REQUIRE(line.find("\"algorithm\":\"phasemax\"") != std::string::npos);
  REQUIRE(line.find("\"n\":60") != std::string::npos);
  REQUIRE(line.find("\"converged\":") != std::string::npos);
}

TEST_CASE("spectral and random init modes") {
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::PhaseLamp;
  cfg.n = 64;
  cfg.alpha_grid = {6.0};
  cfg.init = InitMode::Spectral;
  cfg.trials = 2;
  cfg.master_seed = 5;
  cfg.tol_feas = 1e-8;
  cfg.tol_stat = 1e-6;
  cfg.solver_max_iters = 4000;
  auto recs = run_sweep(cfg);
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    REQUIRE(std::isnan(r.rho_init_requested));
    REQUIRE(r.rho_init_measured > 0.3);  // spectral anchor is informative
    REQUIRE(r.nmse < 1e-3);              // alpha = 6 is comfortably above threshold
  }
  cfg.init = InitMode::Random;
  auto rnd = run_sweep(cfg);
  for (const auto& r : rnd) REQUIRE(r.rho_init_measured < 0.5);
}

TEST_CASE("theory export pins the advertised values") {
  std::ostringstream os;
  export_theory({3.0, 5.0}, {0.5, 0.8}, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  REQUIRE(header ==
          "alpha,rho,s_star,r_star,nmse_pred,rho_c,rho_hat_s,rho_s_indep,"
          "c_star_suff,prior_bound");
  struct Row {
    double alpha, rho, s_star, r_star, nmse_pred, rho_c, rho_hat_s,
        rho_s_indep, c_star_suff, prior_bound;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(is, line)) {
    Row r{};
    std::istringstream ls(line);
    char comma;
    ls >> r.alpha >> comma >> r.rho >> comma >> r.s_star >> comma >> r.r_star >>
        comma >> r.nmse_pred >> comma >> r.rho_c >> comma >> r.rho_hat_s >>
        comma >> r.rho_s_indep >> comma >> r.c_star_suff >> comma >>
        r.prior_bound;
    rows.push_back(r);
  }
  REQUIRE(rows.size() == 4);
  // alpha = 3, rho = 0.8 > rho_c(3): exact recovery predicted
  REQUIRE(rows[1].nmse_pred == 0.0);
  // rho_c at alpha = 5
  REQUIRE(rows[2].rho_c == Catch::Approx(0.3676).margin(5e-4));
  for (const auto& r : rows) {
    REQUIRE(r.rho_s_indep <= r.rho_hat_s);
    REQUIRE(r.rho_c <= r.c_star_suff);
  }
  REQUIRE_THROWS_AS(export_theory({1.5}, {0.5}, os), std::invalid_argument);
}

TEST_CASE("feasibility geometry accepts the limit region") {
  auto rep = check_feasibility_geometry(300, 6.0, 60, 0.05, 7);
  REQUIRE(rep.samples == 60);
  REQUIRE(rep.violation_fraction <= 0.05);
  // the target points (+-1, 0) trivially satisfy the region inequality
  REQUIRE(theory::c_d(1.0, 0.0) == 0.0);
  REQUIRE(theory::c_d(-1.0, 0.0) == 0.0);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.alpha_grid.clear();
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.trials = 0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.rho_grid = {1.5};
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

// Windowed version of the transition-localization property at reduced scale;
// the full n = 1000 sweep lives behind the [.slow] tag below.
TEST_CASE("empirical transition brackets the predicted cosine", "[heavy]") {
  const double rc = theory::rho_c(3.0);
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::PhaseMax;
  cfg.n = 300;
  cfg.alpha_grid = {3.0};
  cfg.trials = 10;
  cfg.master_seed = 77;
  cfg.tol_feas = 1e-8;
  cfg.tol_stat = 1e-7;
  cfg.solver_max_iters = 6000;
  for (double d = -0.06; d <= 0.0601; d += 0.02)
    cfg.rho_grid.push_back(rc + d);
  auto recs = run_sweep(cfg);
  double first_success_rho = 2.0;
  for (std::size_t ri = 0; ri < cfg.rho_grid.size(); ++ri) {
    int succ = 0;
    for (const auto& r : recs)
      if (r.rho_init_requested == cfg.rho_grid[ri]) succ += r.nmse < 1e-4;
    if (succ >= 8 && cfg.rho_grid[ri] < first_success_rho)
      first_success_rho = cfg.rho_grid[ri];
  }
  REQUIRE(std::abs(first_success_rho - rc) <= 0.05);
}

TEST_CASE("transition localization at n = 1000", "[.slow]") {
  const double rc = theory::rho_c(3.0);
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::PhaseMax;
  cfg.n = 1000;
  cfg.alpha_grid = {3.0};
  cfg.trials = 10;
  cfg.master_seed = 78;
  cfg.tol_feas = 1e-8;
  cfg.tol_stat = 1e-7;
  cfg.solver_max_iters = 6000;
  for (double rho = rc - 0.06; rho <= rc + 0.0601; rho += 0.02)
    cfg.rho_grid.push_back(rho);
  auto recs = run_sweep(cfg);
  double first_success_rho = 2.0;
  for (double rho : cfg.rho_grid) {
    int succ = 0;
    for (const auto& r : recs)
      if (r.rho_init_requested == rho) succ += r.nmse < 1e-4;
    if (succ >= 8 && rho < first_success_rho) first_success_rho = rho;
  }
  REQUIRE(std::abs(first_success_rho - rc) <= 0.05);
}
