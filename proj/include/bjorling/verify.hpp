#pragma once

// Geometric checks of a reconstructed patch: induced metric, Gauss map, mean
// curvature, the two boundary conditions, and the closed-form Euclidean
// solution used as an oracle.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "bjorling/bjorling.hpp"
#include "bjorling/ck_solver.hpp"
#include "bjorling/dual.hpp"
#include "bjorling/fields.hpp"
#include "bjorling/models.hpp"
#include "bjorling/parallel.hpp"
#include "bjorling/stencil.hpp"
#include "bjorling/surface.hpp"
#include "bjorling/weierstrass.hpp"

namespace bjorling {

/// Finite-difference derivatives of the patch points. `ok` is set where the
/// node is trusted and every derivative is finite.
struct PatchDerivatives {
  std::vector<Vec3d> f_u, f_v, f_uu, f_vv;
  std::vector<std::uint8_t> ok;
};

inline PatchDerivatives patch_derivatives(const SurfacePatch& patch, int threads = 1) {
  const StripGrid& g = patch.grid;
  const bool fourth = g.n_u >= 6 && g.rows() >= 6;
  const int order = fourth ? 4 : 2;
  if (g.n_u < 4 || g.rows() < 4) throw Error("patch too small for finite differences (need 4 nodes per direction)");
  PatchDerivatives d;
  d.f_u.resize(g.size());
  d.f_v.resize(g.size());
  d.f_uu.resize(g.size());
  d.f_vv.resize(g.size());
  d.ok.assign(g.size(), 0);
  parallel_for(g.rows(), threads, [&](int j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      auto row = [&](int k) { return patch.points[g.index(k, j)]; };
      auto col = [&](int k) { return patch.points[g.index(i, k)]; };
      d.f_u[n] = stencil::apply(row, 1, order, i, g.n_u, g.h_u(), g.periodic);
      d.f_uu[n] = stencil::apply(row, 2, order, i, g.n_u, g.h_u(), g.periodic);
      d.f_v[n] = stencil::apply(col, 1, order, j, g.rows(), g.h_v(), false);
      d.f_vv[n] = stencil::apply(col, 2, order, j, g.rows(), g.h_v(), false);
      bool finite = patch.trusted[n] != 0;
      for (const Vec3d* v : std::initializer_list<const Vec3d*>{&patch.points[n], &d.f_u[n], &d.f_v[n], &d.f_uu[n], &d.f_vv[n]}) {
        for (double x : *v) finite = finite && std::isfinite(x);
      }
      d.ok[n] = finite ? 1 : 0;
    }
  });
  return d;
}

struct InducedMetricReport {
  /// |E - G'| / ((E + G') / 2)
  ResidualReport e_minus_g;
  /// |F| / ((E + G') / 2)
  ResidualReport f;
  double e_minus_g_raw = 0.0;
  double f_raw = 0.0;
};

inline InducedMetricReport induced_metric_residuals(const SurfacePatch& patch, const LieGroupModel& model,
                                                    const PatchDerivatives& d) {
  const StripGrid& g = patch.grid;
  ResidualAccumulator eg("conformality_e_minus_g"), ff("conformality_f");
  InducedMetricReport out;
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      if (!d.ok[n]) {
        eg.exclude();
        ff.exclude();
        continue;
      }
      const Mat3d gm = metric_at(model, patch.points[n]);
      const double e = metric_dot(gm, d.f_u[n], d.f_u[n]);
      const double f = metric_dot(gm, d.f_u[n], d.f_v[n]);
      const double gg = metric_dot(gm, d.f_v[n], d.f_v[n]);
      const double scale = 0.5 * (e + gg);
      out.e_minus_g_raw = std::fmax(out.e_minus_g_raw, std::fabs(e - gg));
      out.f_raw = std::fmax(out.f_raw, std::fabs(f));
      eg.add(scale > 0.0 ? std::fabs(e - gg) / scale : std::numeric_limits<double>::infinity(), i, j);
      ff.add(scale > 0.0 ? std::fabs(f) / scale : std::numeric_limits<double>::infinity(), i, j);
    }
  }
  out.e_minus_g = eg.finish();
  out.f = ff.finish();
  return out;
}

inline InducedMetricReport induced_metric_residuals(const SurfacePatch& patch, const LieGroupModel& model) {
  return induced_metric_residuals(patch, model, patch_derivatives(patch));
}

/// Unit normal per node (NaN where excluded or degenerate).
struct GaussMap {
  std::vector<Vec3d> normal;
  std::vector<std::uint8_t> ok;
  std::size_t degenerate = 0;
};

inline GaussMap gauss_map(const SurfacePatch& patch, const LieGroupModel& model, const PatchDerivatives& d) {
  const StripGrid& g = patch.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  GaussMap out;
  out.normal.assign(g.size(), {nan, nan, nan});
  out.ok.assign(g.size(), 0);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!d.ok[n]) continue;
    const Mat3d a = frame_at(model, patch.points[n]);
    const Mat3d ainv = inverse(a);
    const Vec3d x = matvec(ainv, d.f_u[n]);
    const Vec3d y = matvec(ainv, d.f_v[n]);
    const Vec3d c = cross(x, y);
    const double len = norm(c);
    if (!(len > 1e-12 * norm(x) * norm(y)) || len == 0.0) {
      ++out.degenerate;
      continue;
    }
    out.normal[n] = matvec(a, (model.orientation_sign / len) * c);
    out.ok[n] = 1;
  }
  return out;
}

inline GaussMap gauss_map(const SurfacePatch& patch, const LieGroupModel& model) {
  return gauss_map(patch, model, patch_derivatives(patch));
}

/// H = g(f_uu + f_vv + Gamma(f_u, f_u) + Gamma(f_v, f_v), N) / (E + G'),
/// valid for conformal parameterizations.
struct MeanCurvatureField {
  std::vector<double> h;
  ResidualReport abs_h;
};

inline MeanCurvatureField mean_curvature_field(const SurfacePatch& patch, const LieGroupModel& model,
                                               const PatchDerivatives& d, const GaussMap& gm,
                                               double conformality_tol = 1e-3, int threads = 1) {
  const InducedMetricReport im = induced_metric_residuals(patch, model, d);
  if (!(im.e_minus_g.max <= conformality_tol && im.f.max <= conformality_tol)) {
    throw ValidationError("mean curvature needs a conformal patch; induced metric residuals are " +
                          std::to_string(im.e_minus_g.max) + " and " + std::to_string(im.f.max));
  }
  const StripGrid& g = patch.grid;
  MeanCurvatureField out;
  out.h.assign(g.size(), std::numeric_limits<double>::quiet_NaN());
  const bool flat = is_euclidean(model);
  parallel_for(g.rows(), threads, [&](int j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      if (!gm.ok[n]) continue;
      Vec3d lap = d.f_uu[n] + d.f_vv[n];
      if (!flat) {
        const Tensor3 gamma = christoffel_at(model, patch.points[n]);
        for (int c = 0; c < 3; ++c) {
          for (int k = 0; k < 3; ++k) {
            for (int l = 0; l < 3; ++l) {
              lap[c] += gamma[c][k][l] * (d.f_u[n][k] * d.f_u[n][l] + d.f_v[n][k] * d.f_v[n][l]);
            }
          }
        }
      }
      const Mat3d gmet = metric_at(model, patch.points[n]);
      const double e = metric_dot(gmet, d.f_u[n], d.f_u[n]);
      const double gg = metric_dot(gmet, d.f_v[n], d.f_v[n]);
      out.h[n] = metric_dot(gmet, lap, gm.normal[n]) / (e + gg);
    }
  });
  ResidualAccumulator acc("mean_curvature");
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      if (!gm.ok[n]) {
        acc.exclude();
        continue;
      }
      acc.add(std::fabs(out.h[n]), i, j);
    }
  }
  out.abs_h = acc.finish();
  return out;
}

inline MeanCurvatureField mean_curvature_field(const SurfacePatch& patch, const LieGroupModel& model,
                                               double conformality_tol = 1e-3) {
  const PatchDerivatives d = patch_derivatives(patch);
  return mean_curvature_field(patch, model, d, gauss_map(patch, model, d), conformality_tol);
}

struct BoundaryResiduals {
  /// max |f(u,0) - beta(u)| in chart coordinates
  ResidualReport position;
  /// max |N(u,0) - V(u)|_g
  ResidualReport normal;
};

inline BoundaryResiduals bjorling_residuals(const SurfacePatch& patch, const BjorlingData& data,
                                            const LieGroupModel& model, const GaussMap& gm) {
  const StripGrid& g = patch.grid;
  const int j = g.centre_row();
  ResidualAccumulator pos("boundary_position"), nrm("boundary_normal");
  for (int i = 0; i < g.n_u; ++i) {
    const std::size_t n = g.index(i, j);
    const double u = g.u(i);
    pos.add(norm(patch.points[n] - data.curve.position(u)), i, j);
    if (!gm.ok[n]) {
      nrm.exclude();
      continue;
    }
    const Vec3d diff = gm.normal[n] - data.normal.at(u);
    nrm.add(std::sqrt(std::fmax(0.0, metric_dot(metric_at(model, patch.points[n]), diff, diff))), i, j);
  }
  return {pos.finish(), nrm.finish()};
}

inline BoundaryResiduals bjorling_residuals(const SurfacePatch& patch, const BjorlingData& data,
                                            const LieGroupModel& model) {
  return bjorling_residuals(patch, data, model, gauss_map(patch, model));
}

/// Classical Euclidean solution
///   f(u + iv) = Re beta(z) - Re int_0^v (beta' x V)(u + it) dt,
/// from complex evaluation of the expressions and Gauss-Legendre quadrature.
inline SurfacePatch euclidean_schwarz_oracle(const BjorlingData& data, const LieGroupModel& model,
                                             const StripGrid& grid) {
  if (!is_euclidean(model)) throw ValidationError("the closed-form oracle applies to the Euclidean model only");
  if (!data.normal.has_expressions()) throw ValidationError("the closed-form oracle needs closed-form V");
  for (int c = 0; c < 3; ++c) {
    for (const Expr* e : {&data.curve.beta[c], &data.normal.components[c]}) {
      if (e->uses(Func::Log) || e->uses(Func::Sqrt) || e->uses(Func::Tan)) {
        throw ValidationError("the closed-form oracle excludes log, sqrt and tan (branch cuts or poles)");
      }
    }
  }
  using CD = Dual<cplx, 1>;
  auto beta_at = [&](cplx z, Vec3c& pos, Vec3c& vel) {
    const CD x = CD::variable(z, 0);
    for (int c = 0; c < 3; ++c) {
      const CD r = data.curve.beta[c].evaluate<CD>({x});
      pos[c] = r.v;
      vel[c] = r.d[0];
    }
  };
  auto integrand = [&](cplx z) {
    Vec3c pos, vel, v;
    beta_at(z, pos, vel);
    for (int c = 0; c < 3; ++c) v[c] = data.normal.components[c].evaluate<cplx>({z});
    return cross(vel, v);
  };
  using Rule = boost::math::quadrature::gauss<double, 30>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();

  SurfacePatch patch(grid);
  patch.model_name = model.name;
  for (int j = 0; j < grid.rows(); ++j) {
    const double v = grid.v(j);
    for (int i = 0; i < grid.n_u; ++i) {
      const double u = grid.u(i);
      Vec3c pos, vel;
      beta_at(cplx(u, v), pos, vel);
      Vec3c integral{};
      if (v != 0.0) {
        for (std::size_t k = 0; k < x.size(); ++k) {
          for (double sgn : {1.0, -1.0}) {
            if (sgn < 0.0 && x[k] == 0.0) continue;
            const double t = 0.5 * v * (1.0 + sgn * x[k]);
            const Vec3c val = integrand(cplx(u, t));
            for (int c = 0; c < 3; ++c) integral[c] += (0.5 * v * w[k]) * val[c];
          }
        }
      }
      patch.points[grid.index(i, j)] = {pos[0].real() - integral[0].real(), pos[1].real() - integral[1].real(),
                                        pos[2].real() - integral[2].real()};
    }
  }
  return patch;
}

/// Largest distance between two patches over nodes trusted in both.
inline ResidualReport patch_distance(const SurfacePatch& a, const SurfacePatch& b) {
  if (a.points.size() != b.points.size()) throw Error("patches have different grids");
  ResidualAccumulator acc("patch_distance");
  const StripGrid& g = a.grid;
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      if (!a.trusted[n] || !b.trusted[n]) {
        acc.exclude();
        continue;
      }
      acc.add(norm(a.points[n] - b.points[n]), i, j);
    }
  }
  return acc.finish();
}

struct Thresholds {
  double boundary_position = 1e-10;
  double boundary_normal = 1e-6;
  double conformality = 1e-5;
  double mean_curvature = 1e-4;
  double constraint_drift = 1e-8;
  double integrability = 1e-4;
  double frame_holomorphicity = 1e-3;
  /// Frame and coordinate holomorphicity residuals must agree within this factor.
  double holomorphicity_agreement = 10.0;
};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct VerificationReport {
  InducedMetricReport conformality;
  BoundaryResiduals boundary;
  std::optional<ResidualReport> mean_curvature;
  std::string mean_curvature_error;
  double regularity_margin = 0.0;
  ResidualReport constraint_drift;
  ResidualReport integrability;
  std::array<ResidualReport, 3> frame_holomorphicity;
  std::array<ResidualReport, 3> coordinate_holomorphicity;
  ImpliedThirdReport implied_third;
  std::size_t degenerate_normals = 0;
  std::vector<Check> checks;

  bool passed() const {
    for (const Check& c : checks) {
      if (!c.passed) return false;
    }
    return !checks.empty();
  }
};

/// Ratio max(a, b) / min(a, b) with both floored at `floor`.
inline double agreement_ratio(double a, double b, double floor = 1e-12) {
  a = std::fmax(a, floor);
  b = std::fmax(b, floor);
  return std::fmax(a / b, b / a);
}

/// Runs every check on a solved field and its reconstructed patch.
inline VerificationReport verify_solution(const SpinorField& field, const SurfacePatch& patch,
                                          const BjorlingData& data, const LieGroupModel& model,
                                          const Thresholds& th = {}, int threads = 1) {
  VerificationReport r;
  const PatchDerivatives d = patch_derivatives(patch, threads);
  const GaussMap gm = gauss_map(patch, model, d);
  r.degenerate_normals = gm.degenerate;
  r.conformality = induced_metric_residuals(patch, model, d);
  r.boundary = bjorling_residuals(patch, data, model, gm);
  try {
    r.mean_curvature = mean_curvature_field(patch, model, d, gm, 1e-3, threads).abs_h;
  } catch (const ValidationError& e) {
    r.mean_curvature_error = e.what();
  }
  r.regularity_margin = regularity_margin(field);
  r.constraint_drift = constraint_drift_report(field);
  r.integrability = integrability_report(patch);
  r.frame_holomorphicity = frame_holomorphicity_residual(field, model.connection);
  r.coordinate_holomorphicity = coordinate_holomorphicity_residual(patch, model, threads);
  r.implied_third = implied_third_residual(field, model.connection);

  auto add = [&](const std::string& name, double value, double threshold) {
    r.checks.push_back({name, value, threshold, value <= threshold});
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  add("boundary_position", r.boundary.position.max, th.boundary_position);
  add("boundary_normal", r.boundary.normal.max, th.boundary_normal);
  add("conformality", std::fmax(r.conformality.e_minus_g.max, r.conformality.f.max), th.conformality);
  add("mean_curvature", r.mean_curvature ? r.mean_curvature->max : nan, th.mean_curvature);
  add("constraint_drift", r.constraint_drift.max, th.constraint_drift);
  add("integrability", r.integrability.max, th.integrability);
  add("frame_holomorphicity", max_of(r.frame_holomorphicity), th.frame_holomorphicity);
  add("holomorphicity_agreement", agreement_ratio(max_of(r.frame_holomorphicity), max_of(r.coordinate_holomorphicity)),
      th.holomorphicity_agreement);
  r.checks.push_back({"regularity", r.regularity_margin, 0.0, r.regularity_margin > 0.0});
  return r;
}

}  // namespace bjorling
