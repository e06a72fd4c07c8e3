// Dense symmetric eigendecomposition: Householder reduction to tridiagonal
// form followed by the implicit-shift QL iteration, with accumulated
// eigenvectors (the classic tred2/tql2 pair). Hermitian matrices are handled
// through their 2n x 2n real symmetric embedding. Deterministic, no external
// dependencies, sized for n up to ~1000.
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "polyret/common.hpp"

namespace polyret {

struct EigBasis {
  std::size_t dim = 0;
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // orthonormal, column j contiguous at [j*dim]

  std::span<const double> column(std::size_t j) const {
    return {vectors.data() + j * dim, dim};
  }
};

namespace detail {

// Householder reduction of a symmetric matrix (row-major, overwritten) to
// tridiagonal form; transformations accumulated in v.
inline void tred2(std::size_t n, std::vector<double>& v, std::vector<double>& d,
                  std::vector<double>& e) {
  auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * n + j]; };
  for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += V(k, j) * d[k];
          e[k] += V(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k < i; ++k) V(k, j) -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (std::size_t k = 0; k <= i; ++k) V(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal form; eigenvectors accumulate into v.
inline void tql2(std::size_t n, std::vector<double>& v, std::vector<double>& d,
                 std::vector<double>& e) {
  auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * n + j]; };
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0, tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n && std::abs(e[m]) > eps * tst1) ++m;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 80)
          throw std::runtime_error("sym_eig: QL iteration failed to converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        double el1 = e[l + 1], s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          for (std::size_t k = 0; k < n; ++k) {
            h = V(k, ii + 1);
            V(k, ii + 1) = s * V(k, ii) + c * h;
            V(k, ii) = c * V(k, ii) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace detail

// Full eigendecomposition of a dense symmetric matrix (row-major).
inline EigBasis sym_eig(std::size_t n, std::vector<double> a) {
  require(a.size() == n * n, "sym_eig: matrix size mismatch");
  std::vector<double> d(n), e(n);
  detail::tred2(n, a, d, e);
  detail::tql2(n, a, d, e);

  // Sort ascending, reordering the accumulated columns.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
  EigBasis out;
  out.dim = n;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = d[order[j]];
    for (std::size_t i = 0; i < n; ++i)
      out.vectors[j * n + i] = a[i * n + order[j]];
  }
  return out;
}

// --- real <-> realified complex embedding -----------------------------------
// A Hermitian H acts on C^n exactly as the symmetric [Re H, -Im H; Im H, Re H]
// acts on [Re x; Im x], and x^H H x equals the real quadratic form.

inline std::vector<double> realify(const Signal<cxd>& x) {
  std::vector<double> rx(2 * x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    rx[i] = x[i].real();
    rx[i + x.size()] = x[i].imag();
  }
  return rx;
}

inline std::vector<double> realify(const Signal<double>& x) { return x; }

inline void derealify(const std::vector<double>& rx, Signal<cxd>& x) {
  const std::size_t n = rx.size() / 2;
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = cxd(rx[i], rx[i + n]);
}

inline void derealify(const std::vector<double>& rx, Signal<double>& x) { x = rx; }

// Realified dimension of an n-vector of scalar type S.
template <typename S>
std::size_t realified_dim(std::size_t n) {
  return is_complex_v<S> ? 2 * n : n;
}

// Eigendecomposition of a Hermitian matrix given as a dense complex row-major
// array, in the realified representation (each eigenvalue appears twice).
inline EigBasis hermitian_eig_realified(std::size_t n, const std::vector<cxd>& h) {
  require(h.size() == n * n, "hermitian_eig: matrix size mismatch");
  std::vector<double> m(4 * n * n);
  const std::size_t r = 2 * n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double re = h[i * n + j].real();
      double im = h[i * n + j].imag();
      m[i * r + j] = re;
      m[i * r + (j + n)] = -im;
      m[(i + n) * r + j] = im;
      m[(i + n) * r + (j + n)] = re;
    }
  }
  return sym_eig(r, std::move(m));
}

}  // namespace polyret
