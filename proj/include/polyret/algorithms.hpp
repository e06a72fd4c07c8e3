// Recovery algorithms over the magnitude polytope:
//
//   phasemax       one anchored linear program, direction = the initial guess
//   phaselamp      successive linearization-and-maximization: each outer step
//                  re-solves the linear program with the previous iterate as
//                  direction (minorize-maximize on ||x||^2)
//   wphaselamp     weighted variant: maximize x^H D x over the polytope via
//                  the convex-concave procedure on the eigensplit of D
//   wirtinger_flow gradient-descent baseline on the squared intensity loss
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "polyret/ensemble.hpp"
#include "polyret/solver.hpp"
#include "polyret/spectral.hpp"

namespace polyret {

enum class Termination { MaxIters, StepTolerance, SolverFailure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::MaxIters: return "max-iters";
    case Termination::StepTolerance: return "step-tolerance";
    case Termination::SolverFailure: return "solver-failure";
  }
  return "?";
}

namespace detail {

// An inner solve that missed its certificates can still hand the outer loop
// a usable iterate; only non-finite or grossly infeasible outputs abort.
template <typename S>
bool usable_iterate(const SolveReport<S>& rep, const std::vector<double>& y) {
  for (const S& v : rep.x)
    if (!std::isfinite(std::abs(v))) return false;
  double ymax = 0;
  for (double v : y) ymax = std::max(ymax, v);
  return rep.feasibility_violation <= 1e-2 * (1.0 + ymax);
}

}  // namespace detail

template <typename S>
struct RecoveryResult {
  Signal<S> x_hat;
  std::size_t outer_iterations = 0;
  std::vector<double> norm_trace;  // ||x_k||_2^2 per outer iteration
  std::vector<SolveReport<S>> inner_reports;
  Termination terminated_by = Termination::MaxIters;
  std::vector<double> loss_trace;  // wirtinger_flow only
};

template <typename S>
struct AlgoOptions {
  double tol_feas = 1e-9;
  double tol_stat = 1e-8;
  std::size_t solver_max_iters = 0;  // 0 -> 50 n
  const OperatorBounds* bounds = nullptr;
};

template <typename S>
RecoveryResult<S> phasemax(const SensingEnsemble<S>& e,
                           const std::vector<double>& y, const Signal<S>& x_init,
                           const AlgoOptions<S>& opts = {}) {
  require(norm2(x_init) > 0, "phasemax: initial guess must be nonzero");
  OperatorBounds local =
      opts.bounds ? *opts.bounds : estimate_operator_bounds(e);
  auto problem = linear_problem(e, y, x_init);
  SolveOptions<S> sopts;
  sopts.tol_feas = opts.tol_feas;
  sopts.tol_stat = opts.tol_stat;
  sopts.max_iters = opts.solver_max_iters;
  sopts.bounds = &local;
  RecoveryResult<S> out;
  auto rep = solve(problem, sopts);
  out.x_hat = rep.x;
  out.outer_iterations = 1;
  out.norm_trace.push_back(norm_sq(rep.x));
  out.terminated_by =
      rep.converged ? Termination::StepTolerance : Termination::SolverFailure;
  out.inner_reports.push_back(std::move(rep));
  return out;
}

template <typename S>
RecoveryResult<S> phaselamp(const SensingEnsemble<S>& e,
                            const std::vector<double>& y,
                            const Signal<S>& x_init, int max_outer,
                            double eps_step, const AlgoOptions<S>& opts = {}) {
  require(max_outer >= 1, "phaselamp: max_outer must be >= 1");
  OperatorBounds local =
      opts.bounds ? *opts.bounds : estimate_operator_bounds(e);
  RecoveryResult<S> out;
  Signal<S> xk = x_init;
  const SolveReport<S>* prev = nullptr;
  out.terminated_by = Termination::MaxIters;
  for (int k = 0; k < max_outer; ++k) {
    if (norm2(xk) <= 1e-300) {
      out.terminated_by = Termination::StepTolerance;
      break;
    }
    auto problem = linear_problem(e, y, xk);
    SolveOptions<S> sopts;
    sopts.tol_feas = opts.tol_feas;
    sopts.tol_stat = opts.tol_stat;
    sopts.max_iters = opts.solver_max_iters;
    sopts.bounds = &local;
    if (prev != nullptr) {
      sopts.warm_x = &prev->x;
      sopts.warm_u = &prev->dual;
    }
    auto rep = solve(problem, sopts);
    bool unusable = !detail::usable_iterate(rep, y);
    out.norm_trace.push_back(norm_sq(rep.x));
    ++out.outer_iterations;
    double step = dist2(rep.x, xk);
    if (!unusable) xk = rep.x;
    out.inner_reports.push_back(std::move(rep));
    prev = &out.inner_reports.back();
    if (unusable) {
      out.terminated_by = Termination::SolverFailure;
      break;
    }
    if (step <= eps_step) {
      out.terminated_by = Termination::StepTolerance;
      break;
    }
  }
  out.x_hat = xk;
  return out;
}

// Weighted variant. D = (1/m) sum omega(y_i) a_i* a_i^T is eigensplit as
// D = D1 - D2 with D1 from its negative eigenvalues and D2 from the negated
// positive ones (both negative semidefinite). Each outer step maximizes
//   x^H D1 x - 2 Re<D2 x_k, x>
// over the polytope; with nonnegative weights D1 = 0 and the subproblem is a
// plain linear program with direction -2 D2 x_k = 2 D x_k.
template <typename S>
RecoveryResult<S> wphaselamp(const SensingEnsemble<S>& e,
                             const std::vector<double>& y,
                             const Signal<S>& x_init, const OmegaFn& omega,
                             int max_outer, double eps_step,
                             const AlgoOptions<S>& opts = {}) {
  require(max_outer >= 1, "wphaselamp: max_outer must be >= 1");
  OperatorBounds local =
      opts.bounds ? *opts.bounds : estimate_operator_bounds(e);

  auto cov = WeightedCovariance<S>::build(e, y, omega);
  auto basis = std::make_shared<EigBasis>(
      sym_eig(realified_dim<S>(e.cols), cov.dense_realified()));
  double lam_max = 0;
  for (double l : basis->values) lam_max = std::max(lam_max, std::abs(l));
  const double cut = 1e-12 * lam_max;  // numerically zero: in neither split
  std::vector<std::size_t> neg, pos;
  for (std::size_t j = 0; j < basis->values.size(); ++j) {
    if (basis->values[j] < -cut) neg.push_back(j);
    else if (basis->values[j] > cut) pos.push_back(j);
  }

  // b_k = -2 D2 x_k = 2 * sum_{pos} lambda_j <v_j, x_k> v_j
  auto anchor_term = [&](const Signal<S>& xk) {
    std::vector<double> rx = realify(xk);
    std::vector<double> acc(rx.size(), 0.0);
    for (std::size_t j : pos) {
      auto col = basis->column(j);
      double c = 0;
      for (std::size_t i = 0; i < basis->dim; ++i) c += col[i] * rx[i];
      c *= 2.0 * basis->values[j];
      for (std::size_t i = 0; i < basis->dim; ++i) acc[i] += c * col[i];
    }
    Signal<S> b;
    derealify(acc, b);
    return b;
  };

  RecoveryResult<S> out;
  Signal<S> xk = x_init;
  const SolveReport<S>* prev = nullptr;
  out.terminated_by = Termination::MaxIters;
  for (int k = 0; k < max_outer; ++k) {
    Signal<S> b = anchor_term(xk);
    if (neg.empty() && norm2(b) <= 1e-300) {
      out.terminated_by = Termination::StepTolerance;
      break;
    }
    PolytopeProblem<S> problem;
    problem.ensemble = &e;
    problem.y = y;
    if (neg.empty()) {
      problem.objective = LinearObjective<S>{std::move(b)};
    } else {
      problem.objective = ConcaveQuadraticObjective<S>{basis, neg, std::move(b)};
    }
    SolveOptions<S> sopts;
    sopts.tol_feas = opts.tol_feas;
    sopts.tol_stat = opts.tol_stat;
    sopts.max_iters = opts.solver_max_iters;
    sopts.bounds = &local;
    if (prev != nullptr) {
      sopts.warm_x = &prev->x;
      sopts.warm_u = &prev->dual;
    }
    auto rep = solve(problem, sopts);
    bool unusable = !detail::usable_iterate(rep, y);
    out.norm_trace.push_back(norm_sq(rep.x));
    ++out.outer_iterations;
    double step = dist2(rep.x, xk);
    if (!unusable) xk = rep.x;
    out.inner_reports.push_back(std::move(rep));
    prev = &out.inner_reports.back();
    if (unusable) {
      out.terminated_by = Termination::SolverFailure;
      break;
    }
    if (step <= eps_step) {
      out.terminated_by = Termination::StepTolerance;
      break;
    }
  }
  out.x_hat = xk;
  return out;
}

// Gradient descent on f(x) = (1/4m) sum (|<a_i,x>|^2 - y_i^2)^2. Baseline
// only; divergence shows up in the returned NMSE rather than as an error.
// step_size <= 0 selects 0.1 / lambda_max of the y^2-weighted covariance.
template <typename S>
RecoveryResult<S> wirtinger_flow(const SensingEnsemble<S>& e,
                                 const std::vector<double>& y,
                                 const Signal<S>& x_init, int steps,
                                 double step_size = 0.0) {
  require(steps >= 1, "wirtinger_flow: steps must be >= 1");
  const std::size_t m = e.rows;
  if (step_size <= 0) {
    auto cov = WeightedCovariance<S>::build(e, y, [](double v) { return v * v; });
    Rng rng = Rng::stream(e.rng_seed, 0x7766ULL);
    Signal<S> v = rng.template normal_vector<S>(e.cols);
    normalize(v);
    Signal<S> w;
    double lam = 1.0;
    for (int it = 0; it < 100; ++it) {
      cov.apply(v, w);
      lam = std::max(real_part(dot(v, w)), 1e-300);
      double nw = norm2(w);
      if (nw == 0) break;
      for (std::size_t j = 0; j < e.cols; ++j) v[j] = w[j] * (1.0 / nw);
    }
    step_size = 0.1 / lam;
  }

  RecoveryResult<S> out;
  Signal<S> x = x_init, z, grad;
  out.terminated_by = Termination::MaxIters;
  for (int it = 0; it < steps; ++it) {
    e.apply(x, z);
    double loss = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double d = abs_sq(z[i]) - y[i] * y[i];
      loss += d * d;
      z[i] *= d;
    }
    loss /= 4.0 * static_cast<double>(m);
    out.loss_trace.push_back(loss);
    out.norm_trace.push_back(norm_sq(x));
    ++out.outer_iterations;
    if (loss <= 1e-30) {
      out.terminated_by = Termination::StepTolerance;
      break;
    }
    e.apply_adjoint(z, grad);
    const double t = step_size / static_cast<double>(m);
    for (std::size_t j = 0; j < e.cols; ++j) x[j] -= t * grad[j];
  }
  out.x_hat = std::move(x);
  return out;
}

}  // namespace polyret
