#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "polyret/algorithms.hpp"
#include "polyret/metrics.hpp"
#include "polyret/oracles.hpp"

using namespace polyret;

TEST_CASE("symmetric eigendecomposition") {
  Rng rng(50);
  const std::size_t n = 40;
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double v = rng.normal();
      a[i * n + j] = v;
      a[j * n + i] = v;
    }
  auto eb = sym_eig(n, a);
  REQUIRE(std::is_sorted(eb.values.begin(), eb.values.end()));
  double worst = 0;
  for (std::size_t j = 0; j < n; ++j) {
    auto col = eb.column(j);
    double res = 0, nrm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double av = 0;
      for (std::size_t k = 0; k < n; ++k) av += a[i * n + k] * col[k];
      double d = av - eb.values[j] * col[i];
      res += d * d;
      nrm += col[i] * col[i];
    }
    worst = std::max(worst, std::sqrt(res));
    REQUIRE(nrm == Catch::Approx(1.0).margin(1e-12));
  }
  REQUIRE(worst < 1e-11);
}

TEST_CASE("hermitian eigendecomposition via realification") {
  Rng rng(51);
  const std::size_t n = 12;
  std::vector<cxd> h(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      cxd v = (i == j) ? cxd(rng.normal(), 0.0)
                       : cxd(rng.normal(), rng.normal());
      h[i * n + j] = v;
      h[j * n + i] = std::conj(v);
    }
  auto eb = hermitian_eig_realified(n, h);
  // reconstruct H x through the eigenpairs
  Signal<cxd> x = rng.normal_vector<cxd>(n);
  auto rx = realify(x);
  std::vector<double> rec(2 * n, 0.0);
  for (std::size_t j = 0; j < 2 * n; ++j) {
    auto col = eb.column(j);
    double csum = 0;
    for (std::size_t i = 0; i < 2 * n; ++i) csum += col[i] * rx[i];
    csum *= eb.values[j];
    for (std::size_t i = 0; i < 2 * n; ++i) rec[i] += csum * col[i];
  }
  Signal<cxd> via_eig;
  derealify(rec, via_eig);
  Signal<cxd> direct(n, cxd(0, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) direct[i] += h[i * n + k] * x[k];
  for (std::size_t i = 0; i < n; ++i)
    REQUIRE(std::abs(via_eig[i] - direct[i]) < 1e-10);
}

TEST_CASE("anchored LP with a perfect anchor recovers") {
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 200, 4.0, 60);
  Rng rng(61);
  Signal<double> xi = rng.normal_vector<double>(200);
  auto y = measure(e, xi);
  auto init = make_init(xi, 1.0, 62);
  auto rec = phasemax(e, y, init.x_init);
  REQUIRE(rec.outer_iterations == 1);
  REQUIRE(nmse(rec.x_hat, xi) < 1e-6);
  // the anchored objective dominates the anchor's overlap with the target
  REQUIRE(rec.inner_reports[0].objective_value >=
          std::abs(dot(init.x_init, xi)) - 1e-6);
  // returned iterates respect the constraint set at solver tolerance
  double ymax = *std::max_element(y.begin(), y.end());
  REQUIRE(rec.inner_reports[0].feasibility_violation <= 1e-9 * (1.0 + ymax));
}

TEST_CASE("iterative scheme fixes a unit target instantly") {
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 120, 4.0, 63);
  Rng rng(64);
  Signal<double> xi = rng.normal_vector<double>(120);
  normalize(xi);  // unit target: the first subproblem returns it exactly
  auto y = measure(e, xi);
  auto rec = phaselamp(e, y, xi, 25, 1e-4);
  REQUIRE(rec.outer_iterations == 1);
  REQUIRE(rec.terminated_by == Termination::StepTolerance);
  REQUIRE(nmse(rec.x_hat, xi) < 1e-8);
}

TEST_CASE("iterative scheme beats the single LP at alpha 4, rho 0.1") {
  AlgoOptions<double> opts;
  opts.tol_feas = 1e-8;
  opts.tol_stat = 1e-6;
  opts.solver_max_iters = 5000;
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 200, 4.0, 100);
  Rng rng(7000);
  Signal<double> xi = rng.normal_vector<double>(200);
  auto y = measure(e, xi);
  auto init = make_init(xi, 0.1, 300);
  auto pl = phaselamp(e, y, init.x_init, 25, 1e-4, opts);
  auto pm = phasemax(e, y, init.x_init, opts);
  REQUIRE(nmse(pl.x_hat, xi) < 1e-4);
  REQUIRE(nmse(pm.x_hat, xi) > 0.01);
}

TEST_CASE("norm trace is nondecreasing and fixed points lie in the norm set") {
  AlgoOptions<double> opts;
  opts.tol_feas = 1e-11;
  opts.tol_stat = 1e-10;
  opts.solver_max_iters = 200000;
  for (int trial = 0; trial < 5; ++trial) {
    std::uint64_t seed = 500 + trial;
    Rng prng(seed);
    std::size_t n = 20 + prng.next_u64() % 15;
    double alpha = prng.uniform(2.5, 5.0);
    auto e = make_ensemble<double>(EnsembleKind::GaussianReal, n, alpha,
                                   seed * 13);
    Signal<double> xi(n, 0.0);
    xi[0] = 1.0;
    auto y = measure(e, xi);
    auto init = make_init(xi, prng.uniform(0.1, 0.9), seed * 17);
    auto rec = phaselamp(e, y, init.x_init, 40, 1e-8, opts);
    for (std::size_t k = 1; k < rec.norm_trace.size(); ++k)
      REQUIRE(rec.norm_trace[k] >= rec.norm_trace[k - 1] - 1e-9);
    REQUIRE(norm_sq(rec.x_hat) >= std::abs(rec.x_hat[0]) - 1e-6);
  }
}

TEST_CASE("weighted scheme on a diagonal instance") {
  // A = I, xi = e1: y = e1, the polytope is the segment {t e1, |t| <= 1},
  // the weighted direction is proportional to e1; one step lands on +-e1.
  const std::size_t n = 5;
  SensingEnsemble<double> e;
  e.kind = EnsembleKind::GaussianReal;
  e.rows = n;
  e.cols = n;
  e.dense.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e.dense[i * n + i] = 1.0;
  Signal<double> xi(n, 0.0);
  xi[0] = 1.0;
  auto y = measure(e, xi);
  Signal<double> x0(n, 0.1);
  x0[0] = 0.4;  // positive first coordinate
  normalize(x0);
  auto rec = wphaselamp(e, y, x0, [](double v) { return v * v; }, 25, 1e-9);
  REQUIRE(nmse(rec.x_hat, xi) < 1e-8);
}

TEST_CASE("nonnegative weights reduce to preconditioned linearization") {
  // With omega >= 0 the weighted scheme solves a linear program per step with
  // direction 2 D x_k; replaying that loop with an independently built dense
  // D must give the same iterates.
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 24, 3.0, 70);
  Rng rng(71);
  Signal<double> xi = rng.normal_vector<double>(24);
  auto y = measure(e, xi);
  auto init = make_init(xi, 0.5, 72);
  AlgoOptions<double> opts;
  opts.solver_max_iters = 200000;
  const int outers = 3;
  auto rec = wphaselamp(e, y, init.x_init, [](double v) { return v * v; },
                        outers, 0.0, opts);

  // independent dense D
  std::vector<double> D(24 * 24, 0.0);
  for (std::size_t i = 0; i < e.rows; ++i)
    for (std::size_t a = 0; a < 24; ++a)
      for (std::size_t b = 0; b < 24; ++b)
        D[a * 24 + b] += y[i] * y[i] * e.dense[i * 24 + a] *
                         e.dense[i * 24 + b] / static_cast<double>(e.rows);
  Signal<double> xk = init.x_init;
  OperatorBounds bounds = estimate_operator_bounds(e);
  for (int k = 0; k < outers; ++k) {
    Signal<double> dir(24, 0.0);
    for (std::size_t a = 0; a < 24; ++a)
      for (std::size_t b = 0; b < 24; ++b) dir[a] += 2.0 * D[a * 24 + b] * xk[b];
    SolveOptions<double> so;
    so.max_iters = 200000;
    so.bounds = &bounds;
    if (k > 0) so.warm_x = &xk;
    auto rep = solve(linear_problem(e, y, dir), so);
    xk = rep.x;
    REQUIRE(dist2(xk, rec.inner_reports[k].x) < 1e-6);
  }
}

TEST_CASE("indefinite weights exercise the concave-quadratic path") {
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 16, 3.0, 80);
  Rng rng(81);
  Signal<double> xi = rng.normal_vector<double>(16);
  auto y = measure(e, xi);
  double mean = 0;
  for (double v : y) mean += v / y.size();
  double shift = mean * mean;
  auto omega = [shift](double v) { return v * v - shift; };  // sign-indefinite
  auto init = make_init(xi, 0.6, 82);
  AlgoOptions<double> opts;
  opts.solver_max_iters = 300000;
  auto rec = wphaselamp(e, y, init.x_init, omega, 12, 1e-10, opts);
  REQUIRE(rec.outer_iterations >= 1);
  // Every iterate stays feasible...
  for (const auto& rep : rec.inner_reports)
    REQUIRE(rep.feasibility_violation <= 1e-6);
  // ...and the weighted objective x^T D x is nondecreasing along the outer
  // loop (minorize-maximize up to inner tolerance).
  auto cov = WeightedCovariance<double>::build(e, y, omega);
  double prev = -1e300;
  for (const auto& rep : rec.inner_reports) {
    Signal<double> dx;
    cov.apply(rep.x, dx);
    double val = real_part(dot(rep.x, dx));
    REQUIRE(val >= prev - 1e-6);
    prev = val;
  }
}

TEST_CASE("gradient of the intensity loss matches finite differences") {
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 10, 3.0, 90);
  Rng rng(91);
  Signal<double> xi = rng.normal_vector<double>(10);
  auto y = measure(e, xi);
  Signal<double> x = rng.normal_vector<double>(10);

  auto loss = [&](const std::vector<double>& v) {
    Signal<double> z;
    e.apply(v, z);
    double acc = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      double d = z[i] * z[i] - y[i] * y[i];
      acc += d * d;
    }
    return acc / (4.0 * e.rows);
  };
  // analytic gradient (1/m) A^T((z^2 - y^2) z)
  Signal<double> z, grad;
  e.apply(x, z);
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] *= (z[i] * z[i] - y[i] * y[i]);
  e.apply_adjoint(z, grad);
  scale(grad, 1.0 / static_cast<double>(e.rows));

  auto fd = oracles::fd_gradient(loss, x, 1e-6);
  for (std::size_t j = 0; j < 10; ++j)
    REQUIRE(grad[j] == Catch::Approx(fd[j]).epsilon(1e-5).margin(1e-8));
}

TEST_CASE("gradient descent stays at the global minimizer") {
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 64, 6.0, 92);
  Rng rng(93);
  Signal<double> xi = rng.normal_vector<double>(64);
  auto y = measure(e, xi);
  auto rec = wirtinger_flow(e, y, xi, 200);
  REQUIRE(nmse(rec.x_hat, xi) < 1e-10);
}

TEST_CASE("gradient descent recovers from a spectral anchor") {
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 128, 8.0, 94);
  Rng rng(95);
  Signal<double> xi = rng.normal_vector<double>(128);
  auto y = measure(e, xi);
  auto init = spectral_init(e, y, [](double v) { return v * v; }, 400, 96);
  // scale the unit anchor to the norm estimate sqrt(mean y^2)
  double scale_est = 0;
  for (double v : y) scale_est += v * v;
  scale_est = std::sqrt(scale_est / static_cast<double>(y.size()));
  Signal<double> x0 = init.x_init;
  scale(x0, scale_est);
  auto rec = wirtinger_flow(e, y, x0, 2000);
  REQUIRE(nmse(rec.x_hat, xi) < 1e-5);
  REQUIRE(rec.loss_trace.front() > rec.loss_trace.back());
}
