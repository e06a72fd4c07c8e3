// First-order solver for optimization over the magnitude polytope
//   { x : |<a_i, x>| <= y_i, i = 1..m }.
//
// Two objective families:
//   Linear:            maximize Re<c, x>
//   ConcaveQuadratic:  maximize x^H Q x + Re<b, x>,  Q negative semidefinite
//
// The solver runs a primal-dual splitting iteration on the saddle form
//   min_x max_u  -p(x) + Re<u, A x> - sum_i y_i |u_i|,
// whose dual prox is a componentwise shrinkage by sigma*y_i and whose primal
// prox is closed-form for both objective families (for the quadratic one via
// the eigenbasis of Q). Step sizes come from a power-iteration estimate of
// ||A||_2 with the product condition tau*sigma*||A||^2 < 1. Fixed steps keep
// the iteration a proximal-point map, so the fixed-point residual in the
// induced metric is a nonincreasing merit.
//
// The problem is normalized internally (unit max |y_i|, unit objective scale)
// so the tolerances behave as absolute quantities on unit-scale data; reports
// are mapped back to the caller's units.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "polyret/common.hpp"
#include "polyret/eig.hpp"
#include "polyret/ensemble.hpp"

namespace polyret {

// Componentwise projection onto |z| <= bound: clip for real scalars, radial
// scaling (phase preserved) for complex ones. bound = 0 forces z to 0.
inline double project_row(double z, double bound) {
  return std::clamp(z, -bound, bound);
}
inline cxd project_row(const cxd& z, double bound) {
  double mag = std::abs(z);
  if (mag <= bound) return z;
  if (mag == 0) return cxd(0, 0);
  return z * (bound / mag);
}

namespace detail {

inline double shrink(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}
inline cxd shrink(const cxd& v, double t) {
  double mag = std::abs(v);
  if (mag <= t) return cxd(0, 0);
  return v * ((mag - t) / mag);
}

}  // namespace detail

template <typename S>
struct LinearObjective {
  Signal<S> direction;  // c
};

// Q given by the strictly negative eigenpairs of a realified eigenbasis
// (shared with the weighted iteration that builds it).
template <typename S>
struct ConcaveQuadraticObjective {
  std::shared_ptr<const EigBasis> basis;
  std::vector<std::size_t> nsd_indices;  // basis->values[j] < 0 for these j
  Signal<S> linear;                      // b
};

template <typename S>
struct PolytopeProblem {
  const SensingEnsemble<S>* ensemble = nullptr;
  std::vector<double> y;
  std::variant<LinearObjective<S>, ConcaveQuadraticObjective<S>> objective;
};

template <typename S>
PolytopeProblem<S> linear_problem(const SensingEnsemble<S>& e,
                                  std::vector<double> y, Signal<S> direction) {
  return {&e, std::move(y), LinearObjective<S>{std::move(direction)}};
}

template <typename S>
struct SolveReport {
  Signal<S> x;
  Signal<S> dual;  // constraint multiplier estimate at exit
  double objective_value = 0;
  double feasibility_violation = 0;  // max_i (|<a_i,x>| - y_i)+, recomputed
  double stationarity_residual = 0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> merit_trace;  // filled only when requested
};

template <typename S>
struct SolveOptions {
  double tol_feas = 1e-9;
  double tol_stat = 1e-8;
  std::size_t max_iters = 0;  // 0 -> 50 * n
  const OperatorBounds* bounds = nullptr;
  const Signal<S>* warm_x = nullptr;
  const Signal<S>* warm_u = nullptr;
  bool record_merit = false;
};

namespace detail {

// Scale x onto the polytope along its own ray (the set is star-shaped
// around 0), given z = A x.
template <typename S>
double ray_feasibility_scale(const std::vector<double>& y, const Signal<S>& z) {
  double t = 1.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double mag = std::abs(z[i]);
    if (mag > y[i]) {
      if (mag == 0) continue;
      t = std::min(t, y[i] / mag);
    }
  }
  return t;
}

template <typename S>
double max_violation(const std::vector<double>& y, const Signal<S>& z) {
  double v = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    v = std::max(v, std::abs(z[i]) - y[i]);
  return v < 0 ? 0.0 : v;
}

// Applies w <- (I - 2 tau Q)^{-1} w in the realified basis representation.
template <typename S>
void apply_quad_prox(const ConcaveQuadraticObjective<S>& q, double tau,
                     const std::vector<double>& lam_scale, Signal<S>& w) {
  std::vector<double> rw = realify(w);
  const EigBasis& eb = *q.basis;
  for (std::size_t idx = 0; idx < q.nsd_indices.size(); ++idx) {
    std::size_t j = q.nsd_indices[idx];
    auto col = eb.column(j);
    double lam = lam_scale[idx];
    double coef = 1.0 / (1.0 - 2.0 * tau * lam) - 1.0;
    double c = 0;
    for (std::size_t i = 0; i < eb.dim; ++i) c += col[i] * rw[i];
    c *= coef;
    for (std::size_t i = 0; i < eb.dim; ++i) rw[i] += c * col[i];
  }
  derealify(rw, w);
}

// out = Q x with scaled eigenvalues (same ordering as nsd_indices).
template <typename S>
void apply_quad(const ConcaveQuadraticObjective<S>& q,
                const std::vector<double>& lam_scale, const Signal<S>& x,
                Signal<S>& out) {
  std::vector<double> rx = realify(x);
  std::vector<double> acc(rx.size(), 0.0);
  const EigBasis& eb = *q.basis;
  for (std::size_t idx = 0; idx < q.nsd_indices.size(); ++idx) {
    std::size_t j = q.nsd_indices[idx];
    auto col = eb.column(j);
    double c = 0;
    for (std::size_t i = 0; i < eb.dim; ++i) c += col[i] * rx[i];
    c *= lam_scale[idx];
    for (std::size_t i = 0; i < eb.dim; ++i) acc[i] += c * col[i];
  }
  derealify(acc, out);
}

}  // namespace detail

template <typename S>
SolveReport<S> solve(const PolytopeProblem<S>& problem,
                     const SolveOptions<S>& opts = {}) {
  const SensingEnsemble<S>& A = *problem.ensemble;
  const std::size_t n = A.cols;
  const std::size_t m = A.rows;
  require(problem.y.size() == m, "solve: measurement size mismatch");
  require(opts.tol_feas > 0 && opts.tol_stat > 0, "solve: tolerances must be > 0");

  const bool is_linear = std::holds_alternative<LinearObjective<S>>(problem.objective);

  // --- normalization -------------------------------------------------------
  double y_max = 0;
  for (double v : problem.y) {
    require(v >= 0, "solve: measurements must be nonnegative");
    y_max = std::max(y_max, v);
  }
  const double y_scale = y_max > 0 ? y_max : 1.0;
  std::vector<double> yn(m);
  for (std::size_t i = 0; i < m; ++i) yn[i] = problem.y[i] / y_scale;

  Signal<S> cdir;          // normalized linear direction (linear case)
  Signal<S> blin;          // normalized linear term (quadratic case)
  std::vector<double> lam; // normalized Q eigenvalues (quadratic case)
  double obj_scale = 1.0;  // maps normalized objective to caller units
  const ConcaveQuadraticObjective<S>* quad = nullptr;

  if (is_linear) {
    const auto& lin = std::get<LinearObjective<S>>(problem.objective);
    require(lin.direction.size() == n, "solve: direction size mismatch");
    double cn = norm2(lin.direction);
    require(cn > 0, "solve: zero objective direction");
    cdir = lin.direction;
    scale(cdir, 1.0 / cn);
    obj_scale = cn * y_scale;
  } else {
    quad = &std::get<ConcaveQuadraticObjective<S>>(problem.objective);
    require(quad->linear.size() == n, "solve: linear term size mismatch");
    require(quad->basis != nullptr || quad->nsd_indices.empty(),
            "solve: quadratic objective missing eigenbasis");
    double qnorm = 0;
    for (std::size_t j : quad->nsd_indices) {
      double l = quad->basis->values[j];
      require(l < 0, "solve: quadratic part must be negative semidefinite");
      qnorm = std::max(qnorm, -l);
    }
    double bn = norm2(quad->linear);
    double g = std::max(qnorm * y_scale * y_scale, bn * y_scale);
    require(g > 0, "solve: objective is identically zero");
    obj_scale = g;
    blin = quad->linear;
    scale(blin, y_scale / g);
    lam.reserve(quad->nsd_indices.size());
    for (std::size_t j : quad->nsd_indices)
      lam.push_back(quad->basis->values[j] * y_scale * y_scale / g);
  }

  OperatorBounds local_bounds;
  if (opts.bounds == nullptr) local_bounds = estimate_operator_bounds(A);
  const OperatorBounds& bounds = opts.bounds ? *opts.bounds : local_bounds;
  const double L = std::max(bounds.op_norm, 1e-30);
  const double tau = 0.95 / L;
  const double sigma = 0.95 / L;
  // Radius bound of the normalized polytope, for the certified gap.
  double radius = std::numeric_limits<double>::infinity();
  if (bounds.sigma_min > 0) radius = norm2(yn) / bounds.sigma_min;

  const std::size_t max_iters =
      opts.max_iters > 0 ? opts.max_iters : 50 * std::max<std::size_t>(n, 1);

  // --- state ---------------------------------------------------------------
  Signal<S> x(n, S{});
  Signal<S> u(m, S{});
  if (opts.warm_x && opts.warm_x->size() == n) {
    x = *opts.warm_x;
    scale(x, 1.0 / y_scale);
  }
  if (opts.warm_u && opts.warm_u->size() == m) {
    u = *opts.warm_u;
    scale(u, y_scale / obj_scale);
  }
  Signal<S> xbar = x;
  Signal<S> z(m), grad(n), work(n), qx;

  auto normalized_objective = [&](const Signal<S>& v) {
    if (is_linear) return real_part(dot(cdir, v));
    detail::apply_quad(*quad, lam, v, qx);
    return real_part(dot(v, qx)) + real_part(dot(blin, v));
  };

  SolveReport<S> report;
  Signal<S> best_x = x, best_u = u;
  double best_score = std::numeric_limits<double>::infinity();
  double feas_abs_tol = opts.tol_feas * (1.0 + y_max) / y_scale;

  // The dual-first iteration with primal extrapolation is a proximal-point
  // step in the pairing (x_k, u_{k+1}); the monotone fixed-point residual
  // therefore combines the primal difference of step k with the dual
  // difference of step k+1.
  Signal<S> merit_dx, merit_du, merit_adx;
  bool have_dx = false;
  std::size_t it = 0;
  bool converged = false;
  double stat_out = std::numeric_limits<double>::infinity();

  for (; it < max_iters; ++it) {
    // dual ascent + shrinkage
    A.apply(xbar, z);
    if (opts.record_merit) merit_du = u;
    for (std::size_t i = 0; i < m; ++i)
      u[i] = detail::shrink(u[i] + sigma * z[i], sigma * yn[i]);
    if (opts.record_merit) {
      for (std::size_t i = 0; i < m; ++i) merit_du[i] = u[i] - merit_du[i];
      if (have_dx) {
        // ||dw||_M^2 = ||dx||^2/tau + ||du||^2/sigma - 2 Re<du, A dx>
        A.apply(merit_dx, merit_adx);
        double msq = norm_sq(merit_dx) / tau + norm_sq(merit_du) / sigma -
                     2.0 * real_part(dot(merit_du, merit_adx));
        report.merit_trace.push_back(std::sqrt(msq < 0 ? 0.0 : msq));
      }
    }
    // primal prox
    A.apply_adjoint(u, grad);
    if (opts.record_merit) merit_dx = x;
    if (is_linear) {
      for (std::size_t j = 0; j < n; ++j) {
        S xj = x[j] - tau * grad[j] + tau * cdir[j];
        xbar[j] = 2.0 * xj - x[j];
        x[j] = xj;
      }
    } else {
      for (std::size_t j = 0; j < n; ++j)
        work[j] = x[j] - tau * grad[j] + tau * blin[j];
      detail::apply_quad_prox(*quad, tau, lam, work);
      for (std::size_t j = 0; j < n; ++j) {
        xbar[j] = 2.0 * work[j] - x[j];
        x[j] = work[j];
      }
    }
    if (opts.record_merit) {
      for (std::size_t j = 0; j < n; ++j) merit_dx[j] = x[j] - merit_dx[j];
      have_dx = true;
    }

    // periodic convergence test
    if ((it + 1) % 16 == 0 || it + 1 == max_iters) {
      A.apply(x, z);
      double feas = detail::max_violation(yn, z);
      double stat;
      double gap_cert = 0;
      if (is_linear) {
        A.apply_adjoint(u, grad);
        double dinf_sq = 0;
        for (std::size_t j = 0; j < n; ++j) dinf_sq += abs_sq(cdir[j] - grad[j]);
        double dinf = std::sqrt(dinf_sq);
        double dual_val = 0;
        for (std::size_t i = 0; i < m; ++i) dual_val += yn[i] * std::abs(u[i]);
        double t = detail::ray_feasibility_scale(yn, z);
        double primal_val = t * real_part(dot(cdir, x));
        double supp = dinf == 0 ? 0.0 : radius * dinf;
        gap_cert = dual_val + supp - primal_val;
        stat = dinf;
      } else {
        detail::apply_quad(*quad, lam, x, qx);
        A.apply_adjoint(u, grad);
        double dinf_sq = 0;
        for (std::size_t j = 0; j < n; ++j)
          dinf_sq += abs_sq(2.0 * qx[j] + blin[j] - grad[j]);
        stat = std::sqrt(dinf_sq);
        // dual-side fixed-point residual (complementarity proxy)
        double ufp = 0;
        for (std::size_t i = 0; i < m; ++i)
          ufp += abs_sq(u[i] - detail::shrink(u[i] + sigma * z[i], sigma * yn[i]));
        stat = std::max(stat, std::sqrt(ufp) / (sigma * (1.0 + norm2(u))));
      }
      double score = std::max(feas / feas_abs_tol, stat / opts.tol_stat);
      if (is_linear)
        score = std::max(score, gap_cert * obj_scale / (0.5 * opts.tol_stat));
      if (score < best_score) {
        best_score = score;
        best_x = x;
        best_u = u;
        stat_out = stat;
      }
      if (score <= 1.0) {
        converged = true;
        ++it;
        break;
      }
    }
  }

  report.x = std::move(best_x);
  scale(report.x, y_scale);
  report.dual = std::move(best_u);
  scale(report.dual, obj_scale / y_scale);
  report.iterations = it;
  report.converged = converged;
  report.stationarity_residual = stat_out;

  // Recompute diagnostics from scratch in caller units.
  A.apply(report.x, z);
  report.feasibility_violation = detail::max_violation(problem.y, z);
  Signal<S> xn = report.x;
  scale(xn, 1.0 / y_scale);
  report.objective_value = obj_scale * normalized_objective(xn);
  return report;
}

// Nonnegative duality gap between the primal value at the feasibility-scaled
// x and the Lagrangian dual bound at u. The dual bound needs the support
// value of the polytope in the residual direction c - A^H u; when that
// residual is non-negligible it is evaluated with an internal linear solve,
// otherwise a radius bound suffices. Zero (to solver accuracy) iff (x, u) is
// an optimal primal-dual pair. Linear objectives only.
template <typename S>
double duality_gap(const PolytopeProblem<S>& problem, const Signal<S>& x,
                   const Signal<S>& u, const OperatorBounds* bounds = nullptr) {
  const auto* lin = std::get_if<LinearObjective<S>>(&problem.objective);
  require(lin != nullptr, "duality_gap: defined for linear objectives only");
  const SensingEnsemble<S>& A = *problem.ensemble;
  require(x.size() == A.cols && u.size() == A.rows,
          "duality_gap: dimension mismatch");

  Signal<S> z;
  A.apply(x, z);
  double t = detail::ray_feasibility_scale(problem.y, z);
  double primal = t * real_part(dot(lin->direction, x));

  double dual_val = 0;
  for (std::size_t i = 0; i < A.rows; ++i)
    dual_val += problem.y[i] * std::abs(u[i]);

  Signal<S> res(A.cols);
  A.apply_adjoint(u, res);
  for (std::size_t j = 0; j < A.cols; ++j) res[j] = lin->direction[j] - res[j];
  double rn = norm2(res);

  double support;
  double cn = norm2(lin->direction);
  if (rn <= 1e-10 * (1.0 + cn)) {
    OperatorBounds local;
    if (bounds == nullptr) {
      local = estimate_operator_bounds(A);
      bounds = &local;
    }
    double radius = bounds->sigma_min > 0
                        ? norm2(problem.y) / bounds->sigma_min
                        : std::numeric_limits<double>::infinity();
    support = rn == 0 ? 0.0 : radius * rn;
  } else {
    PolytopeProblem<S> sub{problem.ensemble, problem.y,
                           LinearObjective<S>{std::move(res)}};
    SolveOptions<S> sopts;
    sopts.bounds = bounds;
    support = solve(sub, sopts).objective_value;
  }
  double gap = dual_val + support - primal;
  return gap < 0 ? 0.0 : gap;
}

}  // namespace polyret
