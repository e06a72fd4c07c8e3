#include <catch2/catch_amalgamated.hpp>

#include "polyret/ensemble.hpp"
#include "polyret/metrics.hpp"
#include "polyret/rng.hpp"
#include "polyret/spectral.hpp"

using namespace polyret;

TEST_CASE("gaussian ensemble shape and determinism") {
  auto e1 = make_ensemble<double>(EnsembleKind::GaussianReal, 4, 2.0, 7);
  REQUIRE(e1.rows == 8);
  REQUIRE(e1.cols == 4);
  auto e2 = make_ensemble<double>(EnsembleKind::GaussianReal, 4, 2.0, 7);
  REQUIRE(e1.dense == e2.dense);  // bit-identical

  Rng rng(3);
  Signal<double> x = rng.normal_vector<double>(4);
  REQUIRE(measure(e1, x) == measure(e2, x));

  auto e3 = make_ensemble<double>(EnsembleKind::GaussianReal, 4, 2.0, 8);
  REQUIRE(e1.dense != e3.dense);
}

TEST_CASE("coded diffraction structure") {
  auto e = make_ensemble<cxd>(EnsembleKind::CodedDiffraction, 8, 3.0, 1);
  REQUIRE(e.rows == 24);
  REQUIRE(e.patterns.size() == 3);
  for (const auto& p : e.patterns)
    for (double v : p) REQUIRE(std::abs(v) == 1.0);

  // row (k,l) = k-th DFT vector .* pattern l
  auto row = e.row(11);  // l = 1, k = 3
  for (std::size_t j = 0; j < 8; ++j) {
    double ang = -2.0 * pi() * 3.0 * static_cast<double>(j) / 8.0;
    cxd expect = e.patterns[1][j] * cxd(std::cos(ang), std::sin(ang));
    REQUIRE(std::abs(row[j] - expect) < 1e-12);
  }

  REQUIRE_THROWS_AS(make_ensemble<cxd>(EnsembleKind::CodedDiffraction, 8, 2.5, 1),
                    std::invalid_argument);
}

TEST_CASE("coded diffraction agrees with dense multiplication") {
  for (std::size_t n : {5, 8, 16}) {  // non-power-of-two exercises Bluestein
    auto e = make_ensemble<cxd>(EnsembleKind::CodedDiffraction, n, 2.0, 42 + n);
    Rng rng(n);
    Signal<cxd> x = rng.normal_vector<cxd>(n);
    Signal<cxd> z;
    e.apply(x, z);
    for (std::size_t i = 0; i < e.rows; ++i) {
      auto row = e.row(i);
      cxd direct{};
      for (std::size_t j = 0; j < n; ++j) direct += row[j] * x[j];
      REQUIRE(std::abs(direct - z[i]) < 1e-10);
    }
    // adjoint pairing <u, Ax> = <A^H u, x>
    Signal<cxd> u = rng.normal_vector<cxd>(e.rows), at;
    e.apply_adjoint(u, at);
    REQUIRE(std::abs(dot(u, z) - dot(at, x)) < 1e-9);
  }
}

TEST_CASE("measure basics") {
  SensingEnsemble<double> e;
  e.kind = EnsembleKind::GaussianReal;
  e.rows = 2;
  e.cols = 2;
  e.dense = {1.0, 0.0, 0.3, -0.7};
  Signal<double> e1{1.0, 0.0};
  auto y = measure(e, e1);
  REQUIRE(y[0] == 1.0);

  Signal<double> zero{0.0, 0.0};
  auto y0 = measure(e, zero);
  REQUIRE(y0[0] == 0.0);
  REQUIRE(y0[1] == 0.0);

  // per-row brute force on a random 3x2 instance
  auto g = make_ensemble<double>(EnsembleKind::GaussianReal, 2, 1.5, 5);
  Signal<double> x{1.0, -2.0};
  auto ym = measure(g, x);
  for (std::size_t i = 0; i < g.rows; ++i) {
    double direct = std::abs(g.dense[i * 2] - 2.0 * g.dense[i * 2 + 1]);
    REQUIRE(ym[i] == Catch::Approx(direct).margin(1e-14));
  }

  REQUIRE_THROWS_AS(measure(g, Signal<double>{1.0}), std::invalid_argument);
}

TEST_CASE("measure is absolutely homogeneous") {
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 6, 3.0, 11);
  Rng rng(12);
  Signal<double> x = rng.normal_vector<double>(6);
  auto y1 = measure(e, x);
  for (double c : {2.5, -1.25}) {
    Signal<double> cx = x;
    scale(cx, c);
    auto y2 = measure(e, cx);
    for (std::size_t i = 0; i < y1.size(); ++i)
      REQUIRE(y2[i] == Catch::Approx(std::abs(c) * y1[i]).epsilon(1e-12));
  }
}

TEST_CASE("nmse handles the global ambiguity") {
  Rng rng(9);
  Signal<double> xi = rng.normal_vector<double>(20);
  REQUIRE(nmse(xi, xi) == 0.0);
  Signal<double> neg = xi;
  scale(neg, -1.0);
  REQUIRE(nmse(neg, xi) == 0.0);
  Signal<double> zero(20, 0.0);
  REQUIRE(nmse(zero, xi) == Catch::Approx(1.0));
  REQUIRE_THROWS_AS(nmse(xi, zero), std::invalid_argument);

  // complex: invariant under any global phase
  Signal<cxd> cxi = rng.normal_vector<cxd>(16);
  Signal<cxd> xh = rng.normal_vector<cxd>(16);
  double base = nmse(xh, cxi);
  for (double phi : {0.3, 1.2, -2.8}) {
    Signal<cxd> rot = xh;
    cxd ph(std::cos(phi), std::sin(phi));
    for (auto& v : rot) v *= ph;
    REQUIRE(nmse(rot, cxi) == Catch::Approx(base).margin(1e-12));
  }
}

TEST_CASE("make_init hits the requested cosine exactly") {
  Rng rng(21);
  Signal<double> xi = rng.normal_vector<double>(1000);

  auto g1 = make_init(xi, 1.0, 5);
  REQUIRE(norm2(g1.x_init) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(cosine_similarity(g1.x_init, xi) == Catch::Approx(1.0).margin(1e-12));

  auto g0 = make_init(xi, 0.0, 5);
  REQUIRE(std::abs(dot(g0.x_init, xi)) / norm2(xi) < 1e-12);

  auto g = make_init(xi, 0.63, 5);
  REQUIRE(norm2(g.x_init) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(cosine_similarity(g.x_init, xi) ==
          Catch::Approx(0.63).margin(1e-12));

  REQUIRE_THROWS_AS(make_init(xi, 1.2, 5), std::invalid_argument);
  REQUIRE_THROWS_AS(make_init(xi, -0.1, 5), std::invalid_argument);

  // complex variant
  Signal<cxd> cxi = rng.normal_vector<cxd>(300);
  auto gc = make_init(cxi, 0.4, 6);
  REQUIRE(cosine_similarity(gc.x_init, cxi) ==
          Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("spectral init on a diagonal instance") {
  // A = I (m = n): D is diagonal with the squared measurements; the leading
  // eigenvector is the axis of the largest |xi| entry.
  const std::size_t n = 6;
  SensingEnsemble<double> e;
  e.kind = EnsembleKind::GaussianReal;
  e.rows = n;
  e.cols = n;
  e.dense.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e.dense[i * n + i] = 1.0;
  Signal<double> xi(n, 0.0);
  xi[0] = 1.0;
  auto y = measure(e, xi);
  double residual = 0;
  auto init = spectral_init(e, y, [](double v) { return v * v; }, 200, 3, &xi,
                            &residual);
  REQUIRE(residual <= 1e-8);
  REQUIRE(std::abs(std::abs(init.x_init[0]) - 1.0) < 1e-6);
  REQUIRE(dot(init.x_init, xi) >= 0.0);  // aligned in test mode

  REQUIRE_THROWS_AS(
      spectral_init(e, std::vector<double>(n, 0.0),
                    [](double v) { return v * v; }, 10),
      std::invalid_argument);
}

TEST_CASE("spectral init correlates with the target") {
  // Monte Carlo sanity at n = 200, alpha = 6: cosine > 0.5 in >= 18/20 runs.
  int good = 0;
  double worst_res = 0;
  for (int s = 0; s < 20; ++s) {
    auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 200, 6.0,
                                   900 + s);
    Rng rng(1700 + s);
    Signal<double> xi = rng.normal_vector<double>(200);
    auto y = measure(e, xi);
    double res = 0;
    auto init = spectral_init(e, y, [](double v) { return v * v; }, 400,
                              37 + s, nullptr, &res);
    worst_res = std::max(worst_res, res);
    if (cosine_similarity(init.x_init, xi) > 0.5) ++good;
  }
  REQUIRE(good >= 18);
  REQUIRE(worst_res <= 1e-8);
}

TEST_CASE("spectral init matches a dense eigensolve") {
  auto e = make_ensemble<double>(EnsembleKind::GaussianReal, 40, 5.0, 77);
  Rng rng(78);
  Signal<double> xi = rng.normal_vector<double>(40);
  auto y = measure(e, xi);
  auto omega = make_omega("y2", y);
  auto init = spectral_init(e, y, omega, 500, 79);

  auto cov = WeightedCovariance<double>::build(e, y, omega);
  auto eb = sym_eig(40, cov.dense_realified());
  auto lead = eb.column(39);  // largest eigenvalue (ascending order)
  double ip = 0;
  for (std::size_t j = 0; j < 40; ++j) ip += lead[j] * init.x_init[j];
  REQUIRE(std::abs(ip) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("truncation preprocessing zeroes large measurements") {
  std::vector<double> y{1.0, 1.0, 1.0, 10.0};
  auto om = make_omega("y2-trunc", y);  // mean 3.25, cutoff 9.75
  REQUIRE(om(1.0) == 1.0);
  REQUIRE(om(10.0) == 0.0);
  REQUIRE_THROWS_AS(make_omega("nope", y), std::invalid_argument);
}
