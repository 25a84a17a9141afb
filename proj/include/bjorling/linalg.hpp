#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace bjorling {

// Small fixed-size 3D algebra, generic over the scalar so the same code runs
// on doubles, complex numbers and duals.

template <class T>
using Vec3 = std::array<T, 3>;

/// Row-major: m[i][j] is row i, column j.
template <class T>
using Mat3 = std::array<std::array<T, 3>, 3>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using Vec3c = Vec3<std::complex<double>>;

template <class T>
Mat3<T> identity3() {
  Mat3<T> m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = T(i == j ? 1.0 : 0.0);
  }
  return m;
}

template <class T>
Mat3<T> transpose(const Mat3<T>& a) {
  Mat3<T> r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
  }
  return r;
}

template <class T>
Mat3<T> matmul(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      T s = a[i][0] * b[0][j];
      s += a[i][1] * b[1][j];
      s += a[i][2] * b[2][j];
      r[i][j] = s;
    }
  }
  return r;
}

template <class M, class V>
auto matvec(const Mat3<M>& a, const Vec3<V>& x) {
  using R = decltype(a[0][0] * x[0]);
  Vec3<R> r{};
  for (int i = 0; i < 3; ++i) r[i] = a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2];
  return r;
}

template <class T>
T det(const Mat3<T>& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

/// Cofactor inverse. The caller is responsible for rejecting singular input.
template <class T>
Mat3<T> inverse(const Mat3<T>& a) {
  const T inv_det = T(1.0) / det(a);
  Mat3<T> r{};
  r[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv_det;
  r[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_det;
  r[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_det;
  r[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv_det;
  r[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_det;
  r[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_det;
  r[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv_det;
  r[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_det;
  r[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_det;
  return r;
}

template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/// g(a, b) for a real symmetric metric matrix.
inline double metric_dot(const Mat3d& g, const Vec3d& a, const Vec3d& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s += g[i][j] * a[i] * b[j];
  }
  return s;
}

inline double norm(const Vec3d& a) { return std::sqrt(dot(a, a)); }

inline Vec3d operator+(const Vec3d& a, const Vec3d& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3d operator-(const Vec3d& a, const Vec3d& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3d operator*(double s, const Vec3d& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double max_abs_diff(const Mat3d& a, const Mat3d& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m = std::fmax(m, std::fabs(a[i][j] - b[i][j]));
  }
  return m;
}

}  // namespace bjorling
