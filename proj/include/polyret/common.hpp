// Shared scalar/vector helpers for the polytope phase-retrieval library.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyret {

using cxd = std::complex<double>;

template <typename S>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename S>
inline constexpr bool is_complex_v = is_complex<S>::value;

// A signal is a plain dense vector of real or complex entries.
template <typename S>
using Signal = std::vector<S>;

inline double conj_mul(double a, double b) { return a * b; }
inline cxd conj_mul(const cxd& a, const cxd& b) { return std::conj(a) * b; }

inline double abs_sq(double v) { return v * v; }
inline double abs_sq(const cxd& v) { return v.real() * v.real() + v.imag() * v.imag(); }

// Inner product <a,b> = sum conj(a_i) b_i.
template <typename S>
S dot(std::span<const S> a, std::span<const S> b) {
  S acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += conj_mul(a[i], b[i]);
  return acc;
}

template <typename S>
S dot(const Signal<S>& a, const Signal<S>& b) {
  return dot(std::span<const S>(a), std::span<const S>(b));
}

inline double real_part(double v) { return v; }
inline double real_part(const cxd& v) { return v.real(); }

template <typename S>
double norm_sq(const Signal<S>& v) {
  double acc = 0;
  for (const S& e : v) acc += abs_sq(e);
  return acc;
}

template <typename S>
double norm2(const Signal<S>& v) {
  return std::sqrt(norm_sq(v));
}

template <typename S>
void scale(Signal<S>& v, double t) {
  for (S& e : v) e *= t;
}

// v += t * w
template <typename S, typename T>
void axpy(Signal<S>& v, T t, const Signal<S>& w) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += t * w[i];
}

template <typename S>
double dist2(const Signal<S>& a, const Signal<S>& b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += abs_sq(a[i] - b[i]);
  return std::sqrt(acc);
}

template <typename S>
void normalize(Signal<S>& v) {
  double nv = norm2(v);
  if (nv <= 0) throw std::invalid_argument("cannot normalize a zero vector");
  scale(v, 1.0 / nv);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

constexpr double pi() { return 3.14159265358979323846; }

}  // namespace polyret
