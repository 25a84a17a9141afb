#pragma once

// Three-dimensional Lie groups with left-invariant metrics, described in a
// single chart by the matrix A(x) whose column j holds the coordinate
// components of the orthonormal left-invariant field E_j.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bjorling/dual.hpp"
#include "bjorling/error.hpp"
#include "bjorling/expr.hpp"
#include "bjorling/linalg.hpp"

namespace bjorling {

/// t[a][b][c]; for connection coefficients L[i][j][k] = g(nabla_{E_j} E_k, E_i),
/// for structure constants C[l][j][k] with [E_j, E_k] = sum_l C[l][j][k] E_l,
/// for Christoffel symbols Gamma[i][k][l].
using Tensor3 = std::array<std::array<std::array<double, 3>, 3>, 3>;

struct ChartInterval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x > lo && x < hi; }
};

inline const std::vector<std::string>& coordinate_names() {
  static const std::vector<std::string> names = {"x1", "x2", "x3"};
  return names;
}

/// Input description of a model, before validation.
struct ModelSpec {
  std::string name;
  std::array<ChartInterval, 3> chart{};
  /// Optional sampling box for validation; defaults are derived from the chart.
  std::array<std::optional<std::array<double, 2>>, 3> sample_box{};
  /// frame[i][j]: coordinate component i of E_j.
  std::array<std::array<std::string, 3>, 3> frame{};
  /// Explicit structure constants as (l, j, k, value), 1-based indices.
  std::vector<std::tuple<int, int, int, double>> structure_constants;
};

struct LieGroupModel {
  std::string name;
  std::array<ChartInterval, 3> chart{};
  std::array<std::array<double, 2>, 3> sample_box{};
  std::array<std::array<Expr, 3>, 3> frame{};
  Tensor3 structure{};
  Tensor3 connection{};
  int orientation_sign = 1;
  std::vector<std::string> warnings;

  bool in_chart(const Vec3d& x) const {
    return chart[0].contains(x[0]) && chart[1].contains(x[1]) && chart[2].contains(x[2]);
  }
};

namespace detail {

inline std::string point_str(const Vec3d& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << x[0] << ", " << x[1] << ", " << x[2] << ")";
  return os.str();
}

inline void require_in_chart(const LieGroupModel& m, const Vec3d& x) {
  if (!m.in_chart(x)) {
    throw ValidationError("point " + point_str(x) + " is outside the chart of model '" + m.name + "'");
  }
}

}  // namespace detail

/// A(x) evaluated with any scalar type (doubles, duals, complex).
template <class T>
Mat3<T> frame_matrix(const LieGroupModel& m, const Vec3<T>& x) {
  Mat3<T> a{};
  const std::span<const T> xs(x.data(), 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = m.frame[i][j].template evaluate<T>(xs);
  }
  return a;
}

inline Mat3d frame_at(const LieGroupModel& m, const Vec3d& x) {
  detail::require_in_chart(m, x);
  Mat3d a = frame_matrix<double>(m, x);
  if (std::fabs(det(a)) < 1e-14) {
    throw ValidationError("singular frame at " + detail::point_str(x) + " in model '" + m.name + "'");
  }
  return a;
}

/// G(x) = (A A^T)^{-1}.
inline Mat3d metric_at(const LieGroupModel& m, const Vec3d& x) {
  const Mat3d a = frame_at(m, x);
  return inverse(matmul(a, transpose(a)));
}

/// Koszul formula for an orthonormal frame:
///   2 L^i_{jk} = C^i_{jk} - C^j_{ki} + C^k_{ij}.
/// Entries are filled so that L^i_{jk} = -L^k_{ji} holds bit-exactly.
inline Tensor3 connection_coeffs_from_structure(const Tensor3& c, double jacobi_tol = 1e-10) {
  double scale = 0.0;
  for (int l = 0; l < 3; ++l) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        if (c[l][j][k] != -c[l][k][j]) {
          throw ValidationError("structure constants are not antisymmetric in the lower indices");
        }
        scale = std::fmax(scale, std::fabs(c[l][j][k]));
      }
    }
  }
  // Jacobi: sum over cyclic (a,b,c) of [[E_a,E_b],E_c] = 0.
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (int cc = 0; cc < 3; ++cc) {
        for (int m = 0; m < 3; ++m) {
          double s = 0.0;
          for (int l = 0; l < 3; ++l) {
            s += c[l][a][b] * c[m][l][cc] + c[l][b][cc] * c[m][l][a] + c[l][cc][a] * c[m][l][b];
          }
          if (std::fabs(s) > jacobi_tol * std::fmax(1.0, scale * scale)) {
            std::ostringstream os;
            os << "Jacobi identity violated for (" << a + 1 << "," << b + 1 << "," << cc + 1
               << "), component " << m + 1 << ": " << s;
            throw ValidationError(os.str());
          }
        }
      }
    }
  }
  Tensor3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = i; k < 3; ++k) {
        if (k == i) {
          out[i][j][i] = 0.0;
          continue;
        }
        const double v = 0.5 * (c[i][j][k] - c[j][k][i] + c[k][i][j]);
        out[i][j][k] = v;
        out[k][j][i] = -v;
      }
    }
  }
  return out;
}

/// Structure constants from the frame fields by exact forward-mode
/// differentiation of the coordinate commutator at `x`.
inline Tensor3 structure_constants_from_frame(const LieGroupModel& m, const Vec3d& x) {
  using D3 = Dual<double, 3>;
  const Vec3<D3> xd = {D3::variable(x[0], 0), D3::variable(x[1], 1), D3::variable(x[2], 2)};
  const Mat3<D3> ad = frame_matrix<D3>(m, xd);
  Mat3d a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = ad[i][j].v;
  }
  const Mat3d ainv = inverse(a);
  Tensor3 c{};
  for (int j = 0; j < 3; ++j) {
    for (int k = j + 1; k < 3; ++k) {
      Vec3d bracket{};
      for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int q = 0; q < 3; ++q) s += a[q][j] * ad[i][k].d[q] - a[q][k] * ad[i][j].d[q];
        bracket[i] = s;
      }
      const Vec3d comps = matvec(ainv, bracket);
      for (int l = 0; l < 3; ++l) {
        c[l][j][k] = comps[l];
        c[l][k][j] = -comps[l];
      }
    }
  }
  return c;
}

/// Christoffel symbols Gamma[i][k][l] of the Levi-Civita connection of G,
/// from exact derivatives of G's entries.
inline Tensor3 christoffel_at(const LieGroupModel& m, const Vec3d& x) {
  detail::require_in_chart(m, x);
  using D3 = Dual<double, 3>;
  const Vec3<D3> xd = {D3::variable(x[0], 0), D3::variable(x[1], 1), D3::variable(x[2], 2)};
  const Mat3<D3> a = frame_matrix<D3>(m, xd);
  const Mat3<D3> aat = matmul(a, transpose(a));
  if (std::fabs(det(aat).v) < 1e-28) {
    throw ValidationError("singular metric at " + detail::point_str(x));
  }
  const Mat3<D3> g = inverse(aat);
  // g^{-1} = A A^T
  Tensor3 gamma{};
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      for (int l = k; l < 3; ++l) {
        double s = 0.0;
        for (int mm = 0; mm < 3; ++mm) {
          s += aat[i][mm].v * (g[mm][l].d[k] + g[mm][k].d[l] - g[k][l].d[mm]);
        }
        gamma[i][k][l] = 0.5 * s;
        gamma[i][l][k] = 0.5 * s;
      }
    }
  }
  return gamma;
}

/// Frame components of nabla_{E_j} E_k computed through the coordinate
/// Christoffel symbols. Agrees with the model's connection coefficients
/// exactly when both descriptions are consistent.
inline Tensor3 frame_connection_via_christoffel(const LieGroupModel& m, const Vec3d& x) {
  using D3 = Dual<double, 3>;
  const Vec3<D3> xd = {D3::variable(x[0], 0), D3::variable(x[1], 1), D3::variable(x[2], 2)};
  const Mat3<D3> ad = frame_matrix<D3>(m, xd);
  Mat3d a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = ad[i][j].v;
  }
  const Mat3d ainv = inverse(a);
  const Tensor3 gamma = christoffel_at(m, x);
  Tensor3 out{};
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      Vec3d c{};
      for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int q = 0; q < 3; ++q) s += a[q][j] * ad[i][k].d[q];
        for (int p = 0; p < 3; ++p) {
          for (int q = 0; q < 3; ++q) s += gamma[i][p][q] * a[p][j] * a[q][k];
        }
        c[i] = s;
      }
      const Vec3d comps = matvec(ainv, c);
      for (int i = 0; i < 3; ++i) out[i][j][k] = comps[i];
    }
  }
  return out;
}

namespace detail {

inline std::array<double, 2> default_sample_range(const ChartInterval& c) {
  const bool lo_inf = std::isinf(c.lo);
  const bool hi_inf = std::isinf(c.hi);
  if (lo_inf && hi_inf) return {-1.0, 1.0};
  if (!lo_inf && hi_inf) return {c.lo + 0.5, c.lo + 2.0};
  if (lo_inf && !hi_inf) return {c.hi - 2.0, c.hi - 0.5};
  const double w = c.hi - c.lo;
  return {c.lo + 0.1 * w, c.hi - 0.1 * w};
}

inline bool sylvester_positive(const Mat3d& g) {
  const double m1 = g[0][0];
  const double m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  return m1 > 0.0 && m2 > 0.0 && det(g) > 0.0;
}

}  // namespace detail

/// Points of the validation lattice (n per axis) inside the sample box.
inline std::vector<Vec3d> sample_lattice(const LieGroupModel& m, int n = 5) {
  std::vector<Vec3d> pts;
  pts.reserve(static_cast<std::size_t>(n * n * n));
  auto coord = [&](int axis, int t) {
    const auto [lo, hi] = m.sample_box[axis];
    return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * t / (n - 1);
  };
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) pts.push_back({coord(0, a), coord(1, b), coord(2, c)});
    }
  }
  return pts;
}

/// Builds a model from its spec and checks every invariant on the 5x5x5
/// sample lattice; failures name the witness point.
inline LieGroupModel load_model(const ModelSpec& spec) {
  LieGroupModel m;
  m.name = spec.name;
  m.chart = spec.chart;
  for (int i = 0; i < 3; ++i) {
    if (!(spec.chart[i].lo < spec.chart[i].hi)) {
      throw ValidationError("empty chart interval for " + coordinate_names()[i]);
    }
    m.sample_box[i] = spec.sample_box[i].value_or(detail::default_sample_range(spec.chart[i]));
    if (!spec.chart[i].contains(m.sample_box[i][0]) || !spec.chart[i].contains(m.sample_box[i][1])) {
      throw ValidationError("sample box for " + coordinate_names()[i] + " leaves the chart");
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m.frame[i][j] = parse_expr(spec.frame[i][j], coordinate_names());
  }

  const auto lattice = sample_lattice(m);
  int sign = 0;
  for (const Vec3d& x : lattice) {
    Mat3d a{};
    try {
      a = frame_matrix<double>(m, x);
    } catch (const EvalError& e) {
      throw ValidationError(std::string("frame not defined at ") + detail::point_str(x) + ": " + e.what());
    }
    for (const auto& row : a) {
      for (double v : row) {
        if (!std::isfinite(v)) throw ValidationError("non-finite frame entry at " + detail::point_str(x));
      }
    }
    const double d = det(a);
    if (std::fabs(d) < 1e-12) throw ValidationError("singular frame at " + detail::point_str(x));
    const int s = d > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) throw ValidationError("frame orientation changes sign at " + detail::point_str(x));
    const Mat3d g = inverse(matmul(a, transpose(a)));
    if (!detail::sylvester_positive(g)) {
      throw ValidationError("metric not positive definite at " + detail::point_str(x));
    }
    const Mat3d check = matmul(transpose(a), matmul(g, a));
    if (max_abs_diff(check, identity3<double>()) > 1e-10) {
      throw ValidationError("frame is not orthonormal for its metric at " + detail::point_str(x));
    }
  }
  m.orientation_sign = sign;

  // Brackets of left-invariant fields have constant frame components.
  Vec3d centre{};
  for (int i = 0; i < 3; ++i) centre[i] = 0.5 * (m.sample_box[i][0] + m.sample_box[i][1]);
  const Tensor3 derived = structure_constants_from_frame(m, centre);
  for (const Vec3d& x : lattice) {
    const Tensor3 c = structure_constants_from_frame(m, x);
    for (int l = 0; l < 3; ++l) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          if (std::fabs(c[l][j][k] - derived[l][j][k]) > 1e-8 * (1.0 + std::fabs(derived[l][j][k]))) {
            throw ValidationError("frame brackets are not constant (frame is not left-invariant) at " +
                                  detail::point_str(x));
          }
        }
      }
    }
  }

  if (!spec.structure_constants.empty()) {
    Tensor3 c{};
    for (const auto& [l, j, k, value] : spec.structure_constants) {
      if (l < 1 || l > 3 || j < 1 || j > 3 || k < 1 || k > 3) {
        throw ValidationError("structure constant index out of range");
      }
      c[l - 1][j - 1][k - 1] = value;
      c[l - 1][k - 1][j - 1] = -value;
    }
    for (int l = 0; l < 3; ++l) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          if (std::fabs(c[l][j][k] - derived[l][j][k]) > 1e-8) {
            m.warnings.push_back("explicit structure constants differ from the frame brackets; using explicit");
            l = j = k = 3;
          }
        }
      }
    }
    m.structure = c;
  } else {
    m.structure = derived;
  }
  m.connection = connection_coeffs_from_structure(m.structure);
  return m;
}

inline ModelSpec builtin_model_spec(const std::string& name) {
  ModelSpec s;
  s.name = name;
  if (name == "euclidean") {
    s.frame = {{{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}}};
  } else if (name == "heisenberg") {
    // E1 = d1 - x2/2 d3, E2 = d2 + x1/2 d3, E3 = d3; [E1, E2] = E3.
    s.frame = {{{"1", "0", "0"}, {"0", "1", "0"}, {"-x2/2", "x1/2", "1"}}};
  } else if (name == "h3") {
    // Upper half-space, E_i = x3 d_i.
    s.chart[2].lo = 0.0;
    s.frame = {{{"x3", "0", "0"}, {"0", "x3", "0"}, {"0", "0", "x3"}}};
  } else if (name == "h2xr") {
    // Upper half-plane times a line, frame (x2 d1, x2 d2, d3).
    s.chart[1].lo = 0.0;
    s.frame = {{{"x2", "0", "0"}, {"0", "x2", "0"}, {"0", "0", "1"}}};
  } else {
    throw ConfigError("unknown built-in model '" + name + "'");
  }
  return s;
}

inline const std::vector<std::string>& builtin_model_names() {
  static const std::vector<std::string> names = {"euclidean", "heisenberg", "h3", "h2xr"};
  return names;
}

inline LieGroupModel builtin_model(const std::string& name) { return load_model(builtin_model_spec(name)); }

/// True when A is the constant identity matrix (flat coordinates).
inline bool is_euclidean(const LieGroupModel& m) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Expr& e = m.frame[i][j];
      if (!e.free_variables().empty()) return false;
      if (e.evaluate<double>({0.0, 0.0, 0.0}) != (i == j ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

}  // namespace bjorling
