#pragma once

// Bjorling initial data: a regular analytic curve beta in the chart, a unit
// field V along it with g(beta', V) = 0, and the initial spinor
//   psi(u, 0) = A^{-1}(beta(u)) phi(u, 0),  phi(u, 0) = (beta' + i beta' ^ V) / 2.

#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bjorling/dual.hpp"
#include "bjorling/expr.hpp"
#include "bjorling/fields.hpp"
#include "bjorling/models.hpp"

namespace bjorling {

inline const std::vector<std::string>& curve_variables() {
  static const std::vector<std::string> names = {"u"};
  return names;
}

/// Value, first and second derivative of a curve at one parameter.
struct CurveJet {
  Vec3d position{};
  Vec3d velocity{};
  Vec3d acceleration{};
};

struct AnalyticCurve {
  std::array<Expr, 3> beta;
  double u_min = 0.0;
  double u_max = 1.0;
  bool periodic = false;

  Vec3d position(double u) const {
    Vec3d p{};
    for (int i = 0; i < 3; ++i) p[i] = beta[i].evaluate<double>({u});
    return p;
  }

  CurveJet jet(double u) const {
    using D1 = Dual<double, 1>;
    using D2 = Dual<D1, 1>;
    D2 x(D1(u, {1.0}));
    x.d[0] = D1(1.0, {0.0});
    CurveJet out;
    for (int i = 0; i < 3; ++i) {
      const D2 r = beta[i].evaluate<D2>({x});
      out.position[i] = r.v.v;
      out.velocity[i] = r.v.d[0];
      out.acceleration[i] = r.d[0].d[0];
    }
    return out;
  }

  Vec3d velocity(double u) const { return jet(u).velocity; }
};

/// Unit normal field along the curve: either closed-form component
/// expressions in u, or a derived evaluator (see geodesic_normal).
struct NormalField {
  std::array<Expr, 3> components;
  std::function<Vec3d(double)> evaluator;

  bool has_expressions() const { return !evaluator; }

  Vec3d at(double u) const {
    if (evaluator) return evaluator(u);
    Vec3d v{};
    for (int i = 0; i < 3; ++i) v[i] = components[i].evaluate<double>({u});
    return v;
  }
};

struct BjorlingData {
  std::string name;
  AnalyticCurve curve;
  NormalField normal;
};

/// Text form of Bjorling data (the JSON curve/field spec).
struct BjorlingSpec {
  std::string name;
  std::array<std::string, 3> beta;
  std::array<std::string, 3> normal;
  double u_min = 0.0;
  double u_max = 1.0;
  bool periodic = false;
};

inline BjorlingData make_bjorling_data(const BjorlingSpec& spec) {
  if (!(spec.u_max > spec.u_min)) throw ConfigError("u_range must satisfy u_min < u_max");
  BjorlingData d;
  d.name = spec.name;
  for (int i = 0; i < 3; ++i) {
    d.curve.beta[i] = parse_expr(spec.beta[i], curve_variables());
    d.normal.components[i] = parse_expr(spec.normal[i], curve_variables());
  }
  d.curve.u_min = spec.u_min;
  d.curve.u_max = spec.u_max;
  d.curve.periodic = spec.periodic;
  return d;
}

inline const std::vector<std::string>& builtin_data_names() {
  static const std::vector<std::string> names = {"circle_outward", "line_helicoid", "heisenberg_line",
                                                 "heisenberg_helicoid"};
  return names;
}

inline BjorlingSpec builtin_data_spec(const std::string& name) {
  constexpr double two_pi = 6.283185307179586;
  constexpr double pi = 3.141592653589793;
  BjorlingSpec s;
  s.name = name;
  if (name == "circle_outward") {
    // Catenoid seed.
    s.beta = {"cos(u)", "sin(u)", "0"};
    s.normal = {"cos(u)", "sin(u)", "0"};
    s.u_min = 0.0;
    s.u_max = two_pi;
    s.periodic = true;
  } else if (name == "line_helicoid") {
    s.beta = {"u", "0", "0"};
    s.normal = {"0", "-sin(u)", "cos(u)"};
    s.u_min = -pi;
    s.u_max = pi;
  } else if (name == "heisenberg_line") {
    // The x1-axis with V = E3 along it.
    s.beta = {"u", "0", "0"};
    s.normal = {"0", "0", "1"};
    s.u_min = -0.5;
    s.u_max = 0.5;
  } else if (name == "heisenberg_helicoid") {
    // The x1-axis with V = cos(u) E2 + sin(u) E3 in the Heisenberg frame.
    s.beta = {"u", "0", "0"};
    s.normal = {"0", "cos(u)", "u/2*cos(u) + sin(u)"};
    s.u_min = -1.0;
    s.u_max = 1.0;
  } else {
    throw ConfigError("unknown built-in Bjorling data '" + name + "'");
  }
  return s;
}

inline BjorlingData builtin_data(const std::string& name) { return make_bjorling_data(builtin_data_spec(name)); }

/// Sample parameters: n points over I (endpoint excluded when periodic).
inline std::vector<double> sample_parameters(const AnalyticCurve& c, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double h = (c.u_max - c.u_min) / (c.periodic ? n : std::max(1, n - 1));
  for (int k = 0; k < n; ++k) out[k] = c.u_min + k * h;
  return out;
}

struct DataCertificate {
  int n_samples = 0;
  double max_unit_defect = 0.0;        // max |g(V,V) - 1|
  double max_orthogonality = 0.0;      // max |g(beta', V)|
  double min_speed = 0.0;              // min |beta'|_g
  double unit_witness = 0.0;
  double orthogonality_witness = 0.0;
  double speed_witness = 0.0;
  std::vector<std::string> violations;

  bool valid() const { return violations.empty(); }
};

/// Checks the hypotheses of the problem with the model's metric at beta(u).
inline DataCertificate validate(const BjorlingData& data, const LieGroupModel& model, int n_samples = 64,
                                double tol = 1e-10) {
  DataCertificate cert;
  cert.n_samples = n_samples;
  cert.min_speed = std::numeric_limits<double>::infinity();
  for (double u : sample_parameters(data.curve, n_samples)) {
    CurveJet jet;
    Vec3d v{};
    try {
      jet = data.curve.jet(u);
      v = data.normal.at(u);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "data not defined at u=" << u << ": " << e.what();
      cert.violations.push_back(os.str());
      return cert;
    }
    if (!model.in_chart(jet.position)) {
      std::ostringstream os;
      os << "curve leaves the chart at u=" << u;
      cert.violations.push_back(os.str());
      return cert;
    }
    const Mat3d g = metric_at(model, jet.position);
    const double unit = std::fabs(metric_dot(g, v, v) - 1.0);
    const double orth = std::fabs(metric_dot(g, jet.velocity, v));
    const double speed = std::sqrt(metric_dot(g, jet.velocity, jet.velocity));
    if (unit > cert.max_unit_defect) {
      cert.max_unit_defect = unit;
      cert.unit_witness = u;
    }
    if (orth > cert.max_orthogonality) {
      cert.max_orthogonality = orth;
      cert.orthogonality_witness = u;
    }
    if (speed < cert.min_speed) {
      cert.min_speed = speed;
      cert.speed_witness = u;
    }
  }
  auto report = [&](const char* what, double value, double u) {
    std::ostringstream os;
    os.precision(6);
    os << what << " (" << value << ") at u=" << u;
    cert.violations.push_back(os.str());
  };
  if (cert.max_unit_defect > tol) report("V is not unit: |g(V,V)-1|", cert.max_unit_defect, cert.unit_witness);
  if (cert.max_orthogonality > tol) {
    report("V is not orthogonal to beta': |g(beta',V)|", cert.max_orthogonality, cert.orthogonality_witness);
  }
  if (!(cert.min_speed > 1e-10)) report("curve is not regular: |beta'|_g", cert.min_speed, cert.speed_witness);
  return cert;
}

/// Covariant acceleration nabla_{beta'} beta' = beta'' + Gamma(beta)(beta', beta').
inline Vec3d covariant_acceleration(const AnalyticCurve& curve, const LieGroupModel& model, double u) {
  const CurveJet jet = curve.jet(u);
  const Tensor3 gamma = christoffel_at(model, jet.position);
  Vec3d a = jet.acceleration;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) a[i] += gamma[i][k][l] * jet.velocity[k] * jet.velocity[l];
    }
  }
  return a;
}

/// V = beta''/|beta''|_g for an arc-length parameterized curve; the surface
/// then contains beta as a geodesic.
inline NormalField geodesic_normal(const AnalyticCurve& curve, const LieGroupModel& model, int n_samples = 64) {
  for (double u : sample_parameters(curve, n_samples)) {
    const CurveJet jet = curve.jet(u);
    const Mat3d g = metric_at(model, jet.position);
    const double speed = std::sqrt(metric_dot(g, jet.velocity, jet.velocity));
    if (std::fabs(speed - 1.0) > 1e-8) {
      std::ostringstream os;
      os << "curve is not parameterized by arc length (|beta'|_g = " << speed << " at u=" << u << ")";
      throw ValidationError(os.str());
    }
    const Vec3d acc = covariant_acceleration(curve, model, u);
    if (std::sqrt(metric_dot(g, acc, acc)) < 1e-10) {
      std::ostringstream os;
      os << "covariant acceleration vanishes at u=" << u << "; normal undefined";
      throw ValidationError(os.str());
    }
  }
  NormalField out;
  out.evaluator = [curve, model](double u) {
    const Vec3d acc = covariant_acceleration(curve, model, u);
    const Mat3d g = metric_at(model, curve.position(u));
    const double n = std::sqrt(metric_dot(g, acc, acc));
    if (n < 1e-10) throw ValidationError("covariant acceleration vanishes; normal undefined");
    return (1.0 / n) * acc;
  };
  return out;
}

/// psi(u, 0) in frame components: b = A^{-1} beta', w = A^{-1} V,
/// psi = (b + i s (b x w)) / 2 with s the frame orientation (negated by flip).
inline Spinor initial_spinor(const BjorlingData& data, const LieGroupModel& model, double u, bool flip = false) {
  const CurveJet jet = data.curve.jet(u);
  const Mat3d a = frame_at(model, jet.position);
  const Mat3d ainv = inverse(a);
  const Vec3d b = matvec(ainv, jet.velocity);
  const Vec3d w = matvec(ainv, data.normal.at(u));
  const Vec3d bw = cross(b, w);
  const double s = model.orientation_sign * (flip ? -1.0 : 1.0);
  Spinor psi{};
  for (int i = 0; i < 3; ++i) psi[i] = 0.5 * cplx(b[i], s * bw[i]);

  const double mass = std::norm(psi[0]) + std::norm(psi[1]) + std::norm(psi[2]);
  const double q = std::abs(psi[0] * psi[0] + psi[1] * psi[1] + psi[2] * psi[2]);
  if (q > 1e-8 * std::fmax(mass, 1e-300)) {
    std::ostringstream os;
    os << "initial spinor violates sum psi_i^2 = 0 at u=" << u << " (|V|_g != 1 or V not normal)";
    throw ValidationError(os.str());
  }
  return psi;
}

/// Initial spinor on every u-node of the grid.
inline std::vector<Spinor> initial_spinor_row(const BjorlingData& data, const LieGroupModel& model,
                                              const StripGrid& grid, bool flip = false) {
  std::vector<Spinor> row(static_cast<std::size_t>(grid.n_u));
  for (int i = 0; i < grid.n_u; ++i) row[i] = initial_spinor(data, model, grid.u(i), flip);
  return row;
}

/// Strip grid over the curve's parameter interval.
inline StripGrid make_grid(const AnalyticCurve& curve, int n_u, int n_v, double epsilon) {
  StripGrid g;
  g.n_u = n_u;
  g.n_v = n_v;
  g.epsilon = epsilon;
  g.u_min = curve.u_min;
  g.u_max = curve.u_max;
  g.periodic = curve.periodic;
  g.u0 = curve.u_min;
  g.validate();
  return g;
}

}  // namespace bjorling
