// Sensing ensembles and the magnitude measurement operator.
//
// Three ensembles are supported:
//   * GaussianReal      : m x n matrix with i.i.d. N(0,1) entries (S = double)
//   * GaussianComplex   : circularly symmetric unit-variance entries (S = cxd)
//   * CodedDiffraction  : L modulation patterns of +-1 entries; row (k,l) is
//                         the pointwise product of the k-th DFT vector and
//                         pattern l, so m = L*n and the row action is one FFT
//                         per pattern (S = cxd)
//
// The row action is the plain (bilinear) product z_i = a_i^T x; the adjoint
// uses the conjugate transpose so that <u, A x> = <A^H u, x>.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "polyret/common.hpp"
#include "polyret/fft.hpp"
#include "polyret/rng.hpp"

namespace polyret {

enum class EnsembleKind { GaussianReal, GaussianComplex, CodedDiffraction };

inline const char* to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::GaussianReal: return "gaussian-real";
    case EnsembleKind::GaussianComplex: return "gaussian-complex";
    case EnsembleKind::CodedDiffraction: return "coded-diffraction";
  }
  return "?";
}

template <typename S>
struct SensingEnsemble {
  EnsembleKind kind = EnsembleKind::GaussianReal;
  std::size_t rows = 0;  // m
  std::size_t cols = 0;  // n
  std::uint64_t rng_seed = 0;

  // Dense row-major storage for the Gaussian kinds.
  std::vector<S> dense;
  // +-1 modulation patterns for CodedDiffraction; rows = patterns.size()*cols.
  std::vector<std::vector<double>> patterns;

  // z = A x
  void apply(const Signal<S>& x, Signal<S>& z) const {
    require(x.size() == cols, "ensemble/apply: dimension mismatch");
    z.assign(rows, S{});
    if (kind == EnsembleKind::CodedDiffraction) {
      if constexpr (is_complex_v<S>) {
        std::vector<cxd> work(cols);
        for (std::size_t l = 0; l < patterns.size(); ++l) {
          for (std::size_t j = 0; j < cols; ++j) work[j] = patterns[l][j] * x[j];
          dft_forward(work);
          for (std::size_t k = 0; k < cols; ++k) z[l * cols + k] = work[k];
        }
      }
      return;
    }
    for (std::size_t i = 0; i < rows; ++i) {
      const S* row = dense.data() + i * cols;
      S acc{};
      for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
      z[i] = acc;
    }
  }

  // out = A^H u
  void apply_adjoint(const Signal<S>& u, Signal<S>& out) const {
    require(u.size() == rows, "ensemble/apply_adjoint: dimension mismatch");
    out.assign(cols, S{});
    if (kind == EnsembleKind::CodedDiffraction) {
      if constexpr (is_complex_v<S>) {
        std::vector<cxd> work(cols);
        for (std::size_t l = 0; l < patterns.size(); ++l) {
          for (std::size_t k = 0; k < cols; ++k) work[k] = u[l * cols + k];
          dft_adjoint(work);
          for (std::size_t j = 0; j < cols; ++j) out[j] += patterns[l][j] * work[j];
        }
      }
      return;
    }
    for (std::size_t i = 0; i < rows; ++i) {
      const S* row = dense.data() + i * cols;
      const S ui = u[i];
      for (std::size_t j = 0; j < cols; ++j) out[j] += conj_mul(row[j], ui);
    }
  }

  // Explicit i-th row; Gaussian kinds return a view copy, CodedDiffraction
  // materializes f_k .* phi_l. Intended for small-n checks and oracles.
  Signal<S> row(std::size_t i) const {
    require(i < rows, "ensemble/row: index out of range");
    Signal<S> r(cols);
    if (kind == EnsembleKind::CodedDiffraction) {
      if constexpr (is_complex_v<S>) {
        const std::size_t l = i / cols;
        const std::size_t k = i % cols;
        for (std::size_t j = 0; j < cols; ++j) {
          double ang = -2.0 * pi() * static_cast<double>((k * j) % cols) /
                       static_cast<double>(cols);
          r[j] = patterns[l][j] * cxd(std::cos(ang), std::sin(ang));
        }
      }
      return r;
    }
    for (std::size_t j = 0; j < cols; ++j) r[j] = dense[i * cols + j];
    return r;
  }

  double alpha() const { return static_cast<double>(rows) / static_cast<double>(cols); }
};

namespace detail {

template <typename S>
void fill_gaussian_rows(SensingEnsemble<S>& e) {
  Rng rng = Rng::stream(e.rng_seed, 0x67617573ULL);  // ensemble entry stream
  e.dense.resize(e.rows * e.cols);
  for (auto& v : e.dense) {
    if constexpr (is_complex_v<S>) {
      v = rng.cnormal();
    } else {
      v = rng.normal();
    }
  }
}

}  // namespace detail

// Builds a deterministic ensemble. For the Gaussian kinds m = round(alpha*n);
// for CodedDiffraction alpha must be a positive integer L and m = L*n.
template <typename S>
SensingEnsemble<S> make_ensemble(EnsembleKind kind, std::size_t n, double alpha,
                                 std::uint64_t seed) {
  require(n >= 1, "make_ensemble: n must be >= 1");
  SensingEnsemble<S> e;
  e.kind = kind;
  e.cols = n;
  e.rng_seed = seed;
  if (kind == EnsembleKind::CodedDiffraction) {
    if constexpr (!is_complex_v<S>) {
      throw std::invalid_argument(
          "make_ensemble: coded-diffraction ensembles are complex-valued; "
          "instantiate with a complex scalar type");
    } else {
      double l_round = std::round(alpha);
      if (!(alpha > 0) || std::abs(alpha - l_round) > 1e-9) {
        throw std::invalid_argument(
            "make_ensemble: coded-diffraction oversampling must be a positive "
            "integer pattern count L (got alpha=" + std::to_string(alpha) + ")");
      }
      const auto L = static_cast<std::size_t>(l_round);
      e.rows = L * n;
      Rng rng = Rng::stream(seed, 0x636470ULL);  // pattern stream
      e.patterns.resize(L);
      for (auto& p : e.patterns) {
        p.resize(n);
        for (auto& v : p) v = rng.rademacher();
      }
    }
    return e;
  }
  if constexpr (is_complex_v<S>) {
    require(kind == EnsembleKind::GaussianComplex,
            "make_ensemble: real Gaussian ensembles use the real scalar type");
  } else {
    require(kind == EnsembleKind::GaussianReal,
            "make_ensemble: complex ensembles use the complex scalar type");
  }
  auto m = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
  require(m >= 1, "make_ensemble: m = round(alpha*n) must be >= 1");
  e.rows = m;
  detail::fill_gaussian_rows(e);
  return e;
}

// Magnitude measurements y_i = |a_i^T x|.
template <typename S>
std::vector<double> measure(const SensingEnsemble<S>& e, const Signal<S>& x) {
  Signal<S> z;
  e.apply(x, z);
  std::vector<double> y(e.rows);
  for (std::size_t i = 0; i < e.rows; ++i) y[i] = std::abs(z[i]);
  return y;
}

// Spectral-norm bound ||A||_2 and smallest singular value, used for solver
// step sizes and radius bounds. Exact for CodedDiffraction (A^H A = L n I);
// power-iteration estimates otherwise, deterministic for a fixed build.
struct OperatorBounds {
  double op_norm = 0;     // >= ||A||_2 (slightly inflated)
  double sigma_min = 0;   // <= smallest singular value (slightly deflated)
};

template <typename S>
OperatorBounds estimate_operator_bounds(const SensingEnsemble<S>& e,
                                        int iters = 80) {
  OperatorBounds b;
  if (e.kind == EnsembleKind::CodedDiffraction) {
    double ln = static_cast<double>(e.rows);
    b.op_norm = std::sqrt(ln);
    b.sigma_min = std::sqrt(ln);
    return b;
  }
  Rng rng = Rng::stream(e.rng_seed, 0x6f706e6fULL);
  Signal<S> v = rng.template normal_vector<S>(e.cols);
  normalize(v);
  Signal<S> z, w;
  double lam_max = 0;
  for (int it = 0; it < iters; ++it) {
    e.apply(v, z);
    e.apply_adjoint(z, w);
    lam_max = real_part(dot(v, w));
    double nw = norm2(w);
    if (nw == 0) break;
    for (std::size_t j = 0; j < e.cols; ++j) v[j] = w[j] * (1.0 / nw);
  }
  b.op_norm = std::sqrt(std::max(lam_max, 0.0)) * 1.01;
  // Smallest singular value from a shifted power iteration on s*I - A^H A.
  const double shift = 1.05 * b.op_norm * b.op_norm;
  Signal<S> u = rng.template normal_vector<S>(e.cols);
  normalize(u);
  double lam_shift = 0;
  for (int it = 0; it < iters; ++it) {
    e.apply(u, z);
    e.apply_adjoint(z, w);
    for (std::size_t j = 0; j < e.cols; ++j) w[j] = shift * u[j] - w[j];
    lam_shift = real_part(dot(u, w));
    double nw = norm2(w);
    if (nw == 0) break;
    for (std::size_t j = 0; j < e.cols; ++j) u[j] = w[j] * (1.0 / nw);
  }
  double sig_sq = shift - lam_shift;
  b.sigma_min = 0.95 * std::sqrt(std::max(sig_sq, 0.0));
  return b;
}

}  // namespace polyret
