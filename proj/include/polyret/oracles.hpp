// Small brute-force reference implementations used by the self-test suite
// and the unit tests. Nothing here shares code with the solvers they check.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "polyret/common.hpp"

namespace polyret {
namespace oracles {

// Solve a small dense linear system by Gaussian elimination with partial
// pivoting. Returns false when the matrix is numerically singular.
inline bool solve_dense(std::size_t n, std::vector<double> a,
                        std::vector<double> b, std::vector<double>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-12) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[piv * n + k], a[col * n + k]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / a[col * n + col];
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t k = r + 1; k < n; ++k) acc -= a[r * n + k] * x[k];
    x[r] = acc / a[r * n + r];
  }
  return true;
}

struct LpVertexResult {
  double value = 0;
  std::vector<double> x;
};

// Exact solution of  max <c,x>  s.t.  -y <= A x <= y  by enumerating every
// choice of n active constraints with every sign pattern. Exponential; meant
// for n <= 3, m <= 8. Assumes the polytope is bounded (rows span R^n); the
// origin is always a fallback candidate.
inline LpVertexResult lp_vertex_enumeration(std::size_t m, std::size_t n,
                                            const std::vector<double>& a,
                                            const std::vector<double>& y,
                                            const std::vector<double>& c,
                                            double feas_tol = 1e-9) {
  LpVertexResult best;
  best.x.assign(n, 0.0);
  best.value = 0.0;

  std::vector<std::size_t> idx(n);
  std::vector<double> sub(n * n), rhs(n), x;

  auto consider = [&]() {
    for (std::size_t signs = 0; signs < (1u << n); ++signs) {
      for (std::size_t r = 0; r < n; ++r) {
        double s = (signs >> r) & 1u ? -1.0 : 1.0;
        rhs[r] = s * y[idx[r]];
        for (std::size_t kk = 0; kk < n; ++kk)
          sub[r * n + kk] = a[idx[r] * n + kk];
      }
      if (!solve_dense(n, sub, rhs, x)) continue;
      bool feasible = true;
      for (std::size_t i = 0; i < m && feasible; ++i) {
        double zi = 0;
        for (std::size_t kk = 0; kk < n; ++kk) zi += a[i * n + kk] * x[kk];
        if (std::abs(zi) > y[i] + feas_tol) feasible = false;
      }
      if (!feasible) continue;
      double val = 0;
      for (std::size_t kk = 0; kk < n; ++kk) val += c[kk] * x[kk];
      if (val > best.value) {
        best.value = val;
        best.x = x;
      }
    }
  };

  // All size-n subsets of {0..m-1}.
  if (m < n) return best;
  std::vector<std::size_t> comb(n);
  for (std::size_t r = 0; r < n; ++r) comb[r] = r;
  auto next_combination = [&]() {
    std::size_t r = n;
    while (r-- > 0) {
      if (comb[r] < m - n + r) {
        ++comb[r];
        for (std::size_t k2 = r + 1; k2 < n; ++k2) comb[k2] = comb[k2 - 1] + 1;
        return true;
      }
    }
    return false;
  };
  do {
    idx = comb;
    consider();
  } while (next_combination());
  return best;
}

// Golden-section maximization of a unimodal function on [a, b].
template <typename F>
double golden_max(F&& f, double a, double b, double tol = 1e-10) {
  const double inv_phi = 0.6180339887498948482;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

// Argmax of f over an even grid on [a, b] with k points.
template <typename F>
double grid_max(F&& f, double a, double b, std::size_t k) {
  double best_x = a, best_f = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(k - 1);
    double v = f(x);
    if (v > best_f) {
      best_f = v;
      best_x = x;
    }
  }
  return best_x;
}

// Central finite-difference gradient of a scalar function of a real vector.
template <typename F>
std::vector<double> fd_gradient(F&& f, std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    double orig = x[j];
    x[j] = orig + h;
    double fp = f(x);
    x[j] = orig - h;
    double fm = f(x);
    x[j] = orig;
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace oracles
}  // namespace polyret
