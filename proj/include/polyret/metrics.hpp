// Recovery metrics and initial-guess construction.
#pragma once

#include <cmath>
#include <cstdint>

#include "polyret/common.hpp"
#include "polyret/rng.hpp"

namespace polyret {

// Normalized mean squared error, modulo the global sign (real) or global
// phase (complex) ambiguity:
//   real:     min{||xi - xh||^2, ||xi + xh||^2} / ||xi||^2
//   complex:  min_phi ||xi - e^{i phi} xh||^2 / ||xi||^2
// Both reduce to (||xi||^2 + ||xh||^2 - 2|<xh,xi>|) / ||xi||^2.
template <typename S>
double nmse(const Signal<S>& x_hat, const Signal<S>& xi) {
  require(x_hat.size() == xi.size(), "nmse: dimension mismatch");
  double nxi = norm_sq(xi);
  require(nxi > 0, "nmse: target norm must be positive");
  double val = (nxi + norm_sq(x_hat) - 2.0 * std::abs(dot(x_hat, xi))) / nxi;
  return val < 0 ? 0.0 : val;
}

// |<a,b>| / (||a|| ||b||)
template <typename S>
double cosine_similarity(const Signal<S>& a, const Signal<S>& b) {
  double na = norm2(a), nb = norm2(b);
  require(na > 0 && nb > 0, "cosine_similarity: zero vector");
  return std::abs(dot(a, b)) / (na * nb);
}

// Signed overlap s(x) = Re<xi_hat, x> with the unit target direction;
// the radial part r(x) = sqrt(||x||^2 - s^2) is the mass orthogonal to it.
template <typename S>
double overlap_s(const Signal<S>& x, const Signal<S>& xi) {
  double nxi = norm2(xi);
  require(nxi > 0, "overlap_s: target norm must be positive");
  return real_part(dot(xi, x)) / nxi;
}

template <typename S>
double overlap_r(const Signal<S>& x, const Signal<S>& xi) {
  double s = overlap_s(x, xi);
  double rsq = norm_sq(x) - s * s;
  return std::sqrt(rsq < 0 ? 0.0 : rsq);
}

template <typename S>
struct InitialGuess {
  Signal<S> x_init;           // always unit norm
  double rho_target = -1;     // requested cosine, or -1 when not applicable
};

// Unit-norm guess with an exact target cosine:
//   x_init = rho * xi/||xi|| + sqrt(1-rho^2) * w,   w unit, w orthogonal to xi.
// The orthogonal direction is drawn from its own stream, independent of any
// sensing ensemble. Requires n >= 2 unless rho == 1.
template <typename S>
InitialGuess<S> make_init(const Signal<S>& xi, double rho, std::uint64_t seed) {
  require(rho >= 0.0 && rho <= 1.0, "make_init: rho must lie in [0,1]");
  double nxi = norm2(xi);
  require(nxi > 0, "make_init: target norm must be positive");
  InitialGuess<S> out;
  out.rho_target = rho;
  const std::size_t n = xi.size();
  Signal<S> dir(n);
  for (std::size_t j = 0; j < n; ++j) dir[j] = xi[j] * (1.0 / nxi);
  if (rho == 1.0) {
    out.x_init = dir;
    return out;
  }
  require(n >= 2, "make_init: rho < 1 needs n >= 2");
  Rng rng = Rng::stream(seed, 0x696e6974ULL);
  Signal<S> w = rng.template normal_vector<S>(n);
  // Gram-Schmidt against the target direction; redraw on degenerate samples.
  for (int attempt = 0; attempt < 64; ++attempt) {
    S proj = dot(dir, w);
    for (std::size_t j = 0; j < n; ++j) w[j] -= proj * dir[j];
    if (norm2(w) > 1e-12) break;
    w = rng.template normal_vector<S>(n);
  }
  normalize(w);
  double t = std::sqrt(1.0 - rho * rho);
  out.x_init.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.x_init[j] = rho * dir[j] + t * w[j];
  return out;
}

}  // namespace polyret
