// In-place FFT: iterative radix-2 for power-of-two lengths, Bluestein
// otherwise. Forward transform is the unnormalized sum
//   X[k] = sum_j x[j] exp(-2*pi*i*j*k/n).
#pragma once

#include <cstddef>
#include <vector>

#include "polyret/common.hpp"

namespace polyret {
namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_pow2(std::vector<cxd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * pi() / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    cxd wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cxd w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        cxd u = a[i + k];
        cxd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Chirp-z trick: DFT of arbitrary length as a power-of-two convolution.
inline void fft_bluestein(std::vector<cxd>& a, bool inverse) {
  const std::size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cxd> chirp(n);
  for (std::size_t j = 0; j < n; ++j) {
    // j^2 mod 2n keeps the phase argument small.
    std::size_t jj = (j * j) % (2 * n);
    double ang = sign * pi() * static_cast<double>(jj) / static_cast<double>(n);
    chirp[j] = cxd(std::cos(ang), std::sin(ang));
  }
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  std::vector<cxd> u(m, cxd(0, 0)), v(m, cxd(0, 0));
  for (std::size_t j = 0; j < n; ++j) u[j] = a[j] * chirp[j];
  for (std::size_t j = 0; j < n; ++j) {
    cxd c = std::conj(chirp[j]);
    v[j] = c;
    if (j != 0) v[m - j] = c;
  }
  fft_pow2(u, false);
  fft_pow2(v, false);
  for (std::size_t j = 0; j < m; ++j) u[j] *= v[j];
  fft_pow2(u, true);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = u[k] * inv_m * chirp[k];
}

}  // namespace detail

// Unnormalized forward DFT sum.
inline void dft_forward(std::vector<cxd>& a) {
  if (detail::is_pow2(a.size()))
    detail::fft_pow2(a, false);
  else
    detail::fft_bluestein(a, false);
}

// Unnormalized inverse DFT sum: X[k] = sum_j x[j] exp(+2*pi*i*j*k/n).
// Note no 1/n factor; this is the adjoint of dft_forward.
inline void dft_adjoint(std::vector<cxd>& a) {
  if (detail::is_pow2(a.size()))
    detail::fft_pow2(a, true);
  else
    detail::fft_bluestein(a, true);
}

}  // namespace polyret
