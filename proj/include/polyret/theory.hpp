// Deterministic asymptotic theory: the expected-violation function c_d and
// the feasibility region it defines, the scalar concave program giving the
// limiting overlap (s*, r*) and NMSE of the anchored linear program, the
// phase-transition cosine rho_c, and the sufficient-recovery boundaries of
// the iterative (norm-maximization) scheme.
//
// All scalar roots are solved by bracketing + bisection; the 1-D concave
// maximization uses golden section with an analytic endpoint-derivative test.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "polyret/common.hpp"
#include "polyret/rng.hpp"

namespace polyret {
namespace theory {

// ---------------------------------------------------------------------------
// c_d(s, r) = E[ min{|q| - |r g + s q|, 0}^2 ],  q,g iid N(0,1).
//
// Closed form: for r != 0,
//   Upsilon(s,r) = (1/pi) [ ((1-s)^2 + r^2)(pi/2 - atan((1-s)/r))
//                         + ((1+s)^2 + r^2)(pi/2 - atan((1+s)/r)) - 2r ],
// and for r = 0 the pointwise limits (|s|-1)^2 (|s| >= 1) or 0 (|s| < 1).
// Even in s.
// ---------------------------------------------------------------------------
inline double c_d(double s, double r) {
  require(r >= 0, "c_d: r must be nonnegative");
  if (r < 1e-14) {
    double a = std::abs(s);
    return a >= 1.0 ? (a - 1.0) * (a - 1.0) : 0.0;
  }
  // pi/2 - atan(x/r) = atan2(r, x); the two-argument form stays accurate as
  // r -> 0, where the subtraction would cancel catastrophically.
  double t1 = ((1.0 - s) * (1.0 - s) + r * r) * std::atan2(r, 1.0 - s);
  double t2 = ((1.0 + s) * (1.0 + s) + r * r) * std::atan2(r, 1.0 + s);
  double v = (t1 + t2 - 2.0 * r) / pi();
  return v < 0 ? 0.0 : v;
}

// Monte Carlo estimate of the same expectation; the independent oracle for
// the closed form. Returns (estimate, standard error of the mean).
inline std::pair<double, double> c_d_mc(double s, double r,
                                        std::size_t n_samples,
                                        std::uint64_t seed) {
  require(n_samples >= 1, "c_d_mc: n_samples must be >= 1");
  Rng rng = Rng::stream(seed, 0x63646d63ULL);
  double sum = 0, sum_sq = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    double q = rng.normal();
    double g = rng.normal();
    double d = std::abs(q) - std::abs(r * g + s * q);
    double v = d < 0 ? d * d : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  double mean = sum / static_cast<double>(n_samples);
  double var = 0;
  if (n_samples > 1) {
    var = (sum_sq - static_cast<double>(n_samples) * mean * mean) /
          static_cast<double>(n_samples - 1);
    if (var < 0) var = 0;
  }
  return {mean, std::sqrt(var / static_cast<double>(n_samples))};
}

// ---------------------------------------------------------------------------
// Oversampling context. The boundary formulas assume alpha > 2.
// ---------------------------------------------------------------------------
struct AlphaContext {
  double alpha;
  double c_alpha;  // 1 / tan(pi/alpha)

  explicit AlphaContext(double a) : alpha(a) {
    require(a > 2.0 + 1e-12, "AlphaContext: alpha must exceed 2");
    c_alpha = 1.0 / std::tan(pi() / a);
  }
};

// Maximizer of r^2 - alpha*c_d(s, r) over r >= 0:
//   r_alpha(s) = sqrt(c_alpha^2 + 1 - s^2) - c_alpha.
inline double r_alpha(const AlphaContext& ctx, double s) {
  require(std::abs(s) <= 1.0 + 1e-12, "r_alpha: |s| must be <= 1");
  double inside = ctx.c_alpha * ctx.c_alpha + 1.0 - s * s;
  double v = std::sqrt(inside < 0 ? 0.0 : inside) - ctx.c_alpha;
  return v < 0 ? 0.0 : v;
}

// g_alpha(s) = -1 - s^2 + 2 alpha r_alpha(s)/pi
//            + (2 alpha s / pi) atan(s / (r_alpha(s) + c_alpha)).
// Identity: g_alpha(s) = r_alpha(s)^2 - alpha * c_d(s, r_alpha(s)).
inline double g_alpha(const AlphaContext& ctx, double s) {
  double r = r_alpha(ctx, s);
  return -1.0 - s * s + 2.0 * ctx.alpha * r / pi() +
         (2.0 * ctx.alpha * s / pi()) * std::atan(s / (r + ctx.c_alpha));
}

// Phase-transition cosine similarity of the anchored linear program:
//   rho_c(alpha) = sqrt(1 - (pi/alpha) / tan(pi/alpha)),  alpha > 2.
inline double rho_c(double alpha) {
  require(alpha > 2.0 + 1e-12, "rho_c: alpha must exceed 2");
  double x = pi() / alpha;
  return std::sqrt(1.0 - x / std::tan(x));
}

// ---------------------------------------------------------------------------
// Scalar concave program: s* maximizes rho*s + sqrt((1-rho^2) g_alpha(s))
// over [0,1]; r* = r_alpha(s*). The endpoint s = 1 wins exactly when the
// one-sided derivative there is nonnegative, i.e. rho >= rho_c(alpha); in
// that case (1, 0) is returned exactly.
// ---------------------------------------------------------------------------
inline std::pair<double, double> solve_s_star(const AlphaContext& ctx,
                                              double rho_init) {
  require(rho_init >= 0.0 && rho_init <= 1.0,
          "solve_s_star: rho_init must lie in [0,1]");
  if (rho_init >= rho_c(ctx.alpha) - 1e-12)
    return {1.0, 0.0};

  const double w = std::sqrt(1.0 - rho_init * rho_init);
  auto objective = [&](double s) {
    double g = g_alpha(ctx, s);
    return rho_init * s + w * std::sqrt(g < 0 ? 0.0 : g);
  };
  // Golden section on [0,1] (strictly concave objective).
  const double inv_phi = 0.6180339887498948482;
  double a = 0.0, b = 1.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    }
  }
  double s = 0.5 * (a + b);
  return {s, r_alpha(ctx, s)};
}

struct TheoryPoint {
  double alpha = 0;
  double rho_init = 0;
  double s_star = 0;
  double r_star = 0;
  double nmse_pred = 0;
  double objective_pred = 0;  // limiting value of <x_init, x_hat>
  bool recovers = false;
};

// Limiting NMSE = 1 + s*^2 + r*^2 - 2|s*|, zero exactly at (s*,r*) = (1,0).
inline TheoryPoint predict_nmse(const AlphaContext& ctx, double rho_init) {
  TheoryPoint p;
  p.alpha = ctx.alpha;
  p.rho_init = rho_init;
  auto [s, r] = solve_s_star(ctx, rho_init);
  p.s_star = s;
  p.r_star = r;
  p.recovers = (s == 1.0 && r == 0.0);
  p.nmse_pred = p.recovers ? 0.0 : 1.0 + s * s + r * r - 2.0 * std::abs(s);
  if (p.nmse_pred < 0) p.nmse_pred = 0;
  double g = g_alpha(ctx, s);
  p.objective_pred =
      rho_init * s + std::sqrt((1.0 - rho_init * rho_init) * (g < 0 ? 0.0 : g));
  return p;
}

namespace detail {

// Bisection between a and b assuming f(a) and f(b) have opposite signs;
// the endpoints may be given in either order.
template <typename F>
double bisect(F&& f, double a, double b, int iters = 200) {
  double fa = f(a);
  for (int it = 0; it < iters; ++it) {
    double mid = 0.5 * (a + b);
    double fm = f(mid);
    if ((fa <= 0) == (fm <= 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
    if (std::abs(b - a) < 1e-16 * (1.0 + std::abs(a))) break;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Positive root of (pi/alpha) c^2 + c - (1 + c^2) atan(c) = 0: the slope of
// the feasibility-region boundary at s = 1. Feeds the sufficient cosine
// sqrt(c*^2 / (c*^2 + 1)).
inline double c_star(double alpha) {
  require(alpha > 2.0 + 1e-12, "c_star: alpha must exceed 2");
  auto f = [alpha](double c) {
    return (pi() / alpha) * c * c + c - (1.0 + c * c) * std::atan(c);
  };
  // f(tan(pi/alpha)) = tan(pi/alpha) - pi/alpha > 0, and f -> -inf.
  double lo = std::tan(pi() / alpha);
  double hi = std::max(2.0 * lo, 1.0);
  while (f(hi) > 0) {
    hi *= 2.0;
    require(hi < 1e12, "c_star: bracketing failure");
  }
  return detail::bisect(f, lo, hi);  // f(lo) > 0 >= f(hi)
}

inline double c_star_sufficient_cosine(double alpha) {
  double c = c_star(alpha);
  return std::sqrt(c * c / (c * c + 1.0));
}

// Unique root in (0, pi/2) of
//   th cos^2 th + (1 + 3 sin^2 th) atan(sin th cos th / (1 + sin^2 th))
//     = 2 sin th cos th + (pi/alpha) sin^2 th cos^2 th.
// sin(theta*) is the sufficient cosine for the iterative scheme under
// arbitrary (possibly data-dependent) anchors.
inline double theta_star(double alpha) {
  require(alpha > 2.0 + 1e-12, "theta_star: alpha must exceed 2");
  auto f = [alpha](double th) {
    double sn = std::sin(th), cs = std::cos(th);
    double lhs = th * cs * cs +
                 (1.0 + 3.0 * sn * sn) * std::atan(sn * cs / (1.0 + sn * sn));
    double rhs = 2.0 * sn * cs + (pi() / alpha) * sn * sn * cs * cs;
    return lhs - rhs;
  };
  // Negative near 0, positive near pi/2 for alpha > 2.
  double lo = 1e-8, hi = 0.5 * pi() - 1e-8;
  require(f(lo) < 0 && f(hi) > 0, "theta_star: bracket has no sign change");
  return detail::bisect(f, lo, hi);
}

inline double rho_hat_s(double alpha) { return std::sin(theta_star(alpha)); }

// Sharper sufficient cosine when the anchor is independent of the sensing
// vectors:  rho_s = l / sqrt(l^2 + 1)  with
//   s_hat = tan(theta*) / (sqrt(1 + c_alpha^2 + tan^2(theta*)) + c_alpha),
//   l     = (s_hat - (alpha/pi) atan(s_hat / sqrt(c_alpha^2 + 1 - s_hat^2)))
//           / sqrt(g_alpha(s_hat)).
inline double rho_s_independent(double alpha) {
  AlphaContext ctx(alpha);
  double th = theta_star(alpha);
  double tn = std::tan(th);
  double s_hat =
      tn / (std::sqrt(1.0 + ctx.c_alpha * ctx.c_alpha + tn * tn) + ctx.c_alpha);
  double g = g_alpha(ctx, s_hat);
  if (g <= 0)
    throw std::runtime_error("rho_s_independent: g_alpha(s_hat) <= 0");
  double denom = std::sqrt(ctx.c_alpha * ctx.c_alpha + 1.0 - s_hat * s_hat);
  double l = (s_hat - (alpha / pi()) * std::atan(s_hat / denom)) / std::sqrt(g);
  return l / std::sqrt(l * l + 1.0);
}

// Sample-complexity threshold above which the norm-maximization program has
// only the target signals as global optima: alpha > pi/(pi-2).
inline double lamp_threshold() { return pi() / (pi() - 2.0); }

// Earlier sufficient oversampling bound for the anchored linear program:
//   alpha > 2 pi / (pi - arccos(rho)),
// evaluating to 2 at rho = 1 and 4 at rho = 0. Reported for comparison
// curves only; it does not dominate the exact threshold on all of (0, 1).
inline double prior_sufficient_alpha(double rho) {
  require(rho >= 0.0 && rho <= 1.0, "prior_sufficient_alpha: rho in [0,1]");
  return 2.0 * pi() / (pi() - std::acos(rho));
}

// ---------------------------------------------------------------------------
// Feasibility-region boundary r_max(s): the largest r with
// alpha * c_d(s, r) <= r^2. Zero at s = +-1 for alpha >= 2 and positive at
// s = 0; the feasible r-set is an interval by convexity.
// ---------------------------------------------------------------------------
struct FeasBoundary {
  std::vector<std::pair<double, double>> samples;  // (s, r_max(s))
};

inline double r_max(double alpha, double s) {
  require(alpha >= 2.0, "r_max: alpha must be >= 2");
  require(std::abs(s) <= 1.0, "r_max: |s| must be <= 1");
  auto infeasible = [&](double r) { return alpha * c_d(s, r) - r * r > 0; };
  double hi = 1.0;
  int grow = 0;
  while (!infeasible(hi)) {
    hi *= 2.0;
    if (++grow > 60) return hi;  // unreachable for alpha >= 2
  }
  double lo = 0.0;  // feasible: alpha*c_d(s,0) = 0 for |s| <= 1
  for (int it = 0; it < 120; ++it) {
    double mid = 0.5 * (lo + hi);
    if (infeasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  double r = 0.5 * (lo + hi);
  // Below ~1e-7 the sign of alpha*c_d - r^2 is roundoff noise (the leading
  // r^2 terms cancel at alpha = 2); infeasibility was certified at every
  // scale above, and the boundary hits zero only at s = +-1, so snap to the
  // exact limit value.
  return r < 1e-7 ? 0.0 : r;
}

inline FeasBoundary feas_boundary(double alpha, const std::vector<double>& grid) {
  FeasBoundary b;
  b.samples.reserve(grid.size());
  for (double s : grid) b.samples.emplace_back(s, r_max(alpha, s));
  return b;
}

}  // namespace theory
}  // namespace polyret
