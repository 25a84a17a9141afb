#pragma once

// Finite-difference derivatives along one grid line, second or fourth
// order, with periodic wrap-around or one-sided closures of the same order.
// Stencils are applied to differences f(k) - f(ref) so constant data
// differentiates to exactly zero.

#include <array>
#include <cassert>
#include <span>

#include "bjorling/linalg.hpp"

namespace bjorling::stencil {

struct Weights {
  int count = 0;
  std::array<int, 6> offset{};
  std::array<double, 6> coeff{};
};

namespace detail {

inline Weights make(std::initializer_list<int> off, std::initializer_list<double> c, double scale) {
  Weights w;
  w.count = static_cast<int>(off.size());
  int k = 0;
  for (int o : off) w.offset[k++] = o;
  k = 0;
  for (double x : c) w.coeff[k++] = x * scale;
  return w;
}

inline Weights mirror(Weights w, double sign) {
  for (int k = 0; k < w.count; ++k) {
    w.offset[k] = -w.offset[k];
    w.coeff[k] *= sign;
  }
  return w;
}

}  // namespace detail

/// Weights for derivative `deriv` (1 or 2) of accuracy `order` (2 or 4) at
/// node i of a line of n nodes. Offsets are relative to i.
inline Weights weights(int deriv, int order, int i, int n, bool periodic) {
  using detail::make;
  using detail::mirror;
  const int half = order / 2;
  const bool interior = periodic || (i >= half && i < n - half);
  const double sign = deriv == 1 ? -1.0 : 1.0;
  if (deriv == 1 && order == 2) {
    if (interior) return make({-1, 1}, {-0.5, 0.5}, 1.0);
    const Weights left = make({0, 1, 2}, {-1.5, 2.0, -0.5}, 1.0);
    return i == 0 ? left : mirror(left, sign);
  }
  if (deriv == 1 && order == 4) {
    if (interior) return make({-2, -1, 1, 2}, {1.0, -8.0, 8.0, -1.0}, 1.0 / 12.0);
    const int d = i < half ? i : n - 1 - i;
    Weights w = d == 0 ? make({0, 1, 2, 3, 4}, {-25.0, 48.0, -36.0, 16.0, -3.0}, 1.0 / 12.0)
                       : make({-1, 0, 1, 2, 3}, {-3.0, -10.0, 18.0, -6.0, 1.0}, 1.0 / 12.0);
    return i < half ? w : mirror(w, sign);
  }
  if (deriv == 2 && order == 2) {
    if (interior) return make({-1, 0, 1}, {1.0, -2.0, 1.0}, 1.0);
    const Weights left = make({0, 1, 2, 3}, {2.0, -5.0, 4.0, -1.0}, 1.0);
    return i == 0 ? left : mirror(left, sign);
  }
  // deriv == 2, order == 4
  if (interior) return make({-2, -1, 0, 1, 2}, {-1.0, 16.0, -30.0, 16.0, -1.0}, 1.0 / 12.0);
  const int d = i < half ? i : n - 1 - i;
  Weights w = d == 0 ? make({0, 1, 2, 3, 4, 5}, {45.0, -154.0, 214.0, -156.0, 61.0, -10.0}, 1.0 / 12.0)
                     : make({-1, 0, 1, 2, 3, 4}, {10.0, -15.0, -4.0, 14.0, -6.0, 1.0}, 1.0 / 12.0);
  return i < half ? w : mirror(w, sign);
}

/// Applies the stencil to line accessor `f(k)`, k in [0, n). Spacing h.
template <class F>
auto apply(F&& f, int deriv, int order, int i, int n, double h, bool periodic) {
  const Weights w = weights(deriv, order, i, n, periodic);
  auto wrap = [&](int k) { return periodic ? ((k % n) + n) % n : k; };
  const auto ref = f(i);
  auto acc = w.coeff[0] * (f(wrap(i + w.offset[0])) - ref);
  for (int k = 1; k < w.count; ++k) acc = acc + w.coeff[k] * (f(wrap(i + w.offset[k])) - ref);
  const double scale = deriv == 1 ? 1.0 / h : 1.0 / (h * h);
  return scale * acc;
}

}  // namespace bjorling::stencil
