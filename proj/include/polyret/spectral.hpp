// Measurement-weighted covariance D = (1/m) sum_i omega(y_i) a_i* a_i^T,
// its dense (realified) form for eigensplits, and the spectral initializer
// (leading eigenvector by power iteration).
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <type_traits>

#include "polyret/eig.hpp"
#include "polyret/ensemble.hpp"
#include "polyret/metrics.hpp"

namespace polyret {

using OmegaFn = std::function<double(double)>;

// Named preprocessing functions. "y2" is omega(y) = y^2; "y2-trunc" zeroes
// weights above 3x the mean magnitude. Anything else must be supplied as a
// custom OmegaFn by the caller (pluggable hook).
inline OmegaFn make_omega(const std::string& name, const std::vector<double>& y) {
  if (name == "y2") return [](double v) { return v * v; };
  if (name == "y2-trunc") {
    double mean = y.empty() ? 0.0
                            : std::accumulate(y.begin(), y.end(), 0.0) /
                                  static_cast<double>(y.size());
    double cut = 3.0 * mean;
    return [cut](double v) { return v <= cut ? v * v : 0.0; };
  }
  throw std::invalid_argument("unknown preprocessing function: " + name);
}

template <typename S>
struct WeightedCovariance {
  const SensingEnsemble<S>* ensemble = nullptr;
  std::vector<double> weights;  // omega(y_i)

  static WeightedCovariance build(const SensingEnsemble<S>& e,
                                  const std::vector<double>& y,
                                  const OmegaFn& omega) {
    require(y.size() == e.rows, "WeightedCovariance: measurement size mismatch");
    WeightedCovariance w;
    w.ensemble = &e;
    w.weights.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w.weights[i] = omega(y[i]);
    return w;
  }

  void apply(const Signal<S>& x, Signal<S>& out) const {
    Signal<S> z;
    ensemble->apply(x, z);
    const double inv_m = 1.0 / static_cast<double>(ensemble->rows);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] *= weights[i] * inv_m;
    ensemble->apply_adjoint(z, out);
  }

  // Dense symmetric matrix in the realified representation (n x n for real
  // scalars, 2n x 2n for complex). O(m n^2); intended for desk-scale n.
  std::vector<double> dense_realified() const {
    const std::size_t n = ensemble->cols;
    const double inv_m = 1.0 / static_cast<double>(ensemble->rows);
    if constexpr (!is_complex_v<S>) {
      std::vector<double> d(n * n, 0.0);
      for (std::size_t i = 0; i < ensemble->rows; ++i) {
        const double w = weights[i] * inv_m;
        if (w == 0) continue;
        const double* row = ensemble->dense.data() + i * n;
        for (std::size_t a = 0; a < n; ++a) {
          double wa = w * row[a];
          for (std::size_t b = a; b < n; ++b) d[a * n + b] += wa * row[b];
        }
      }
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < a; ++b) d[a * n + b] = d[b * n + a];
      return d;
    } else {
      std::vector<cxd> d(n * n, cxd(0, 0));
      Signal<S> row;
      for (std::size_t i = 0; i < ensemble->rows; ++i) {
        const double w = weights[i] * inv_m;
        if (w == 0) continue;
        row = ensemble->row(i);
        for (std::size_t a = 0; a < n; ++a) {
          cxd wa = w * std::conj(row[a]);
          for (std::size_t b = a; b < n; ++b) d[a * n + b] += wa * row[b];
        }
      }
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < a; ++b) d[a * n + b] = std::conj(d[b * n + a]);
      const std::size_t r = 2 * n;
      std::vector<double> m(r * r);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          double re = d[a * n + b].real();
          double im = d[a * n + b].imag();
          m[a * r + b] = re;
          m[a * r + (b + n)] = -im;
          m[(a + n) * r + b] = im;
          m[(a + n) * r + (b + n)] = re;
        }
      }
      return m;
    }
  }
};

// Leading eigenvector of the weighted covariance by shifted power iteration
// with deflation-free restarts: a stagnating run is abandoned and restarted
// from a fresh random vector rather than deflated.
template <typename S>
InitialGuess<S> spectral_init(const SensingEnsemble<S>& e,
                              const std::vector<double>& y, const OmegaFn& omega,
                              int iters, std::uint64_t seed = 0x73706563ULL,
                              const std::type_identity_t<Signal<S>>* align_with = nullptr,
                              double* residual_out = nullptr) {
  require(iters >= 1, "spectral_init: iters must be >= 1");
  bool any = false;
  for (double v : y) any = any || v > 0;
  require(any, "spectral_init: all-zero measurements");

  auto cov = WeightedCovariance<S>::build(e, y, omega);
  const std::size_t n = e.cols;
  Rng rng = Rng::stream(seed, 0x7370696eULL);

  // Spectral-radius estimate, then iterate on D + shift*I so the largest
  // algebraic eigenvalue dominates even for indefinite weights.
  Signal<S> v = rng.template normal_vector<S>(n);
  normalize(v);
  Signal<S> w;
  double radius = 0;
  for (int it = 0; it < 30; ++it) {
    cov.apply(v, w);
    radius = std::abs(real_part(dot(v, w)));
    double nw = norm2(w);
    if (nw == 0) break;
    for (std::size_t j = 0; j < n; ++j) v[j] = w[j] * (1.0 / nw);
  }
  const double shift = 1.1 * radius + 1e-30;

  Signal<S> best = v;
  double best_res = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (attempt > 0) {
      v = rng.template normal_vector<S>(n);
      normalize(v);
    }
    for (int it = 0; it < iters; ++it) {
      cov.apply(v, w);
      double lambda = real_part(dot(v, w));
      double res_sq = 0;
      for (std::size_t j = 0; j < n; ++j) res_sq += abs_sq(w[j] - lambda * v[j]);
      double res = std::sqrt(res_sq) / std::max(std::abs(lambda), 1e-300);
      if (res < best_res) {
        best_res = res;
        best = v;
      }
      if (res <= 1e-8) break;
      for (std::size_t j = 0; j < n; ++j) w[j] += shift * v[j];
      double nw = norm2(w);
      if (nw == 0) break;
      for (std::size_t j = 0; j < n; ++j) v[j] = w[j] * (1.0 / nw);
    }
    if (best_res <= 1e-8) break;
  }

  if (align_with != nullptr) {
    S ip = dot(best, *align_with);
    if constexpr (is_complex_v<S>) {
      double mag = std::abs(ip);
      if (mag > 0) {
        cxd phase = ip / mag;
        for (auto& c : best) c *= phase;
      }
    } else {
      if (ip < 0)
        for (auto& c : best) c = -c;
    }
  }
  if (residual_out) *residual_out = best_res;
  InitialGuess<S> out;
  out.x_init = std::move(best);
  out.rho_target = -1;
  return out;
}

}  // namespace polyret
