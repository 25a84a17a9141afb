#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>

namespace bjorling {

/// Forward-mode dual number carrying N partial derivatives.
///
/// The value type T may itself be a Dual (nested duals give second
/// derivatives) or std::complex<double> (holomorphic derivatives).
template <class T, std::size_t N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  Dual() = default;
  Dual(T value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Dual(T value, std::array<T, N> partials) : v(value), d(partials) {}

  /// Independent variable number `k` with value `value`.
  static Dual variable(T value, std::size_t k) {
    Dual r(value);
    r.d[k] = T(1);
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t k = 0; k < N; ++k) d[k] += o.d[k];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t k = 0; k < N; ++k) d[k] -= o.d[k];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t k = 0; k < N; ++k) d[k] = d[k] * o.v + v * o.d[k];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const T inv = T(1) / o.v;
    for (std::size_t k = 0; k < N; ++k) d[k] = (d[k] * o.v - v * o.d[k]) * inv * inv;
    v *= inv;
    return *this;
  }
};

template <class T>
struct is_dual : std::false_type {};
template <class T, std::size_t N>
struct is_dual<Dual<T, N>> : std::true_type {};

template <class T, std::size_t N>
Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r(-a.v);
  for (std::size_t k = 0; k < N; ++k) r.d[k] = -a.d[k];
  return r;
}

template <class T, std::size_t N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) { return a += b; }
template <class T, std::size_t N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) { return a -= b; }
template <class T, std::size_t N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) { return a *= b; }
template <class T, std::size_t N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) { return a /= b; }

// Mixed arithmetic with plain doubles.
template <class T, std::size_t N>
Dual<T, N> operator*(double s, Dual<T, N> a) {
  a.v *= s;
  for (auto& x : a.d) x *= s;
  return a;
}
template <class T, std::size_t N>
Dual<T, N> operator*(Dual<T, N> a, double s) { return s * a; }
template <class T, std::size_t N>
Dual<T, N> operator+(Dual<T, N> a, double s) { a.v += s; return a; }
template <class T, std::size_t N>
Dual<T, N> operator+(double s, Dual<T, N> a) { a.v += s; return a; }
template <class T, std::size_t N>
Dual<T, N> operator-(Dual<T, N> a, double s) { a.v -= s; return a; }
template <class T, std::size_t N>
Dual<T, N> operator-(double s, const Dual<T, N>& a) { return Dual<T, N>(T(s)) - a; }
template <class T, std::size_t N>
Dual<T, N> operator/(Dual<T, N> a, double s) { return a * (1.0 / s); }
template <class T, std::size_t N>
Dual<T, N> operator/(double s, const Dual<T, N>& a) { return Dual<T, N>(T(s)) / a; }

namespace detail {
// Applies the chain rule: f(a) with f(a.v) = fv and f'(a.v) = dfv.
template <class T, std::size_t N>
Dual<T, N> chain(const Dual<T, N>& a, const T& fv, const T& dfv) {
  Dual<T, N> r(fv);
  for (std::size_t k = 0; k < N; ++k) r.d[k] = dfv * a.d[k];
  return r;
}
}  // namespace detail

template <class T, std::size_t N>
Dual<T, N> sin(const Dual<T, N>& a) {
  using std::cos, std::sin;
  return detail::chain(a, sin(a.v), cos(a.v));
}
template <class T, std::size_t N>
Dual<T, N> cos(const Dual<T, N>& a) {
  using std::cos, std::sin;
  return detail::chain(a, cos(a.v), -sin(a.v));
}
template <class T, std::size_t N>
Dual<T, N> tan(const Dual<T, N>& a) {
  using std::cos, std::tan;
  const T c = cos(a.v);
  return detail::chain(a, tan(a.v), T(1) / (c * c));
}
template <class T, std::size_t N>
Dual<T, N> sinh(const Dual<T, N>& a) {
  using std::cosh, std::sinh;
  return detail::chain(a, sinh(a.v), cosh(a.v));
}
template <class T, std::size_t N>
Dual<T, N> cosh(const Dual<T, N>& a) {
  using std::cosh, std::sinh;
  return detail::chain(a, cosh(a.v), sinh(a.v));
}
template <class T, std::size_t N>
Dual<T, N> exp(const Dual<T, N>& a) {
  using std::exp;
  const T e = exp(a.v);
  return detail::chain(a, e, e);
}
template <class T, std::size_t N>
Dual<T, N> log(const Dual<T, N>& a) {
  using std::log;
  return detail::chain(a, log(a.v), T(1) / a.v);
}
template <class T, std::size_t N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  return detail::chain(a, s, T(0.5) / s);
}

/// Innermost scalar of a possibly nested dual.
inline double primal(double x) { return x; }
inline std::complex<double> primal(const std::complex<double>& x) { return x; }
template <class T, std::size_t N>
auto primal(const Dual<T, N>& x) { return primal(x.v); }

}  // namespace bjorling
