#pragma once

// Residuals of the Weierstrass conditions for a conformal minimal immersion.
// Frame form (psi, constant L):
//   (1) sum |psi_i|^2 != 0   (2) sum psi_i^2 = 0
//   (3) d psi_i / d zbar + sum_{j,k} L^i_{jk} conj(psi_j) psi_k = 0
// Coordinate form (phi = A(f) psi, Christoffel symbols at f):
//   d phi_i / d zbar + sum_{k,l} Gamma^i_{kl} phi_k conj(phi_l) = 0
//
// d/dzbar = (d/du + i d/dv) / 2 is approximated to second order.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "bjorling/fields.hpp"
#include "bjorling/models.hpp"
#include "bjorling/parallel.hpp"
#include "bjorling/stencil.hpp"

namespace bjorling {

/// sum_{j,k} L^i_{jk} conj(psi_j) psi_k
inline Spinor frame_connection_term(const Tensor3& L, const Spinor& psi) {
  Spinor out{};
  for (int i = 0; i < 3; ++i) {
    cplx s = 0.0;
    for (int j = 0; j < 3; ++j) {
      const cplx cj = std::conj(psi[j]);
      for (int k = 0; k < 3; ++k) {
        if (L[i][j][k] != 0.0) s += L[i][j][k] * cj * psi[k];
      }
    }
    out[i] = s;
  }
  return out;
}

namespace detail {

/// Second-order d/dzbar of a nodewise complex quantity.
template <class Get>
cplx dzbar(const StripGrid& g, Get&& value, int i, int j, int order = 2) {
  const cplx du = stencil::apply([&](int k) { return value(k, j); }, 1, order, i, g.n_u, g.h_u(), g.periodic);
  const cplx dv = stencil::apply([&](int k) { return value(i, k); }, 1, order, j, g.rows(), g.h_v(), false);
  return 0.5 * (du + cplx(0.0, 1.0) * dv);
}

inline void require_stencil_room(const StripGrid& g) {
  if (g.rows() < 3 || g.n_u < 3) throw Error("grid too small for finite differences (need >= 3 nodes per direction)");
}

}  // namespace detail

/// max over trusted nodes of |psi1^2 + psi2^2 + psi3^2|.
inline ResidualReport conformality_report(const SpinorField& field) {
  ResidualAccumulator acc("conformality");
  for (int j = 0; j < field.grid.rows(); ++j) {
    for (int i = 0; i < field.grid.n_u; ++i) {
      if (!field.is_trusted(i, j)) {
        acc.exclude();
        continue;
      }
      const Spinor& p = field.at(i, j);
      acc.add(std::abs(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]), i, j);
    }
  }
  return acc.finish();
}

inline double conformality_residual(const SpinorField& field) { return conformality_report(field).max; }

/// min over trusted nodes of sum |psi_i|^2; zero flags a branch point.
inline double regularity_margin(const SpinorField& field) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < field.values.size(); ++n) {
    if (!field.trusted[n]) continue;
    const Spinor& p = field.values[n];
    m = std::fmin(m, std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]));
  }
  return std::isinf(m) ? 0.0 : m;
}

/// Nodes whose regularity sum falls below `threshold`.
inline std::vector<std::array<int, 2>> irregular_nodes(const SpinorField& field, double threshold) {
  std::vector<std::array<int, 2>> out;
  for (int j = 0; j < field.grid.rows(); ++j) {
    for (int i = 0; i < field.grid.n_u; ++i) {
      if (!field.is_trusted(i, j)) continue;
      const Spinor& p = field.at(i, j);
      if (std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]) < threshold) out.push_back({i, j});
    }
  }
  return out;
}

/// Nodewise residual of the three frame holomorphicity equations.
inline std::vector<Spinor> frame_holomorphicity_field(const SpinorField& field, const Tensor3& L) {
  const StripGrid& g = field.grid;
  detail::require_stencil_room(g);
  std::vector<Spinor> res(g.size());
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const Spinor conn = frame_connection_term(L, field.at(i, j));
      Spinor r{};
      for (int c = 0; c < 3; ++c) {
        r[c] = detail::dzbar(g, [&](int a, int b) { return field.at(a, b)[c]; }, i, j) + conn[c];
      }
      res[g.index(i, j)] = r;
    }
  }
  return res;
}

/// Per-equation max and RMS over trusted nodes.
inline std::array<ResidualReport, 3> frame_holomorphicity_residual(const SpinorField& field, const Tensor3& L) {
  const auto res = frame_holomorphicity_field(field, L);
  std::array<ResidualReport, 3> out;
  for (int c = 0; c < 3; ++c) {
    ResidualAccumulator acc("frame_holomorphicity_" + std::to_string(c + 1));
    for (int j = 0; j < field.grid.rows(); ++j) {
      for (int i = 0; i < field.grid.n_u; ++i) {
        if (!field.is_trusted(i, j)) {
          acc.exclude();
          continue;
        }
        acc.add(std::abs(res[field.grid.index(i, j)][c]), i, j);
      }
    }
    out[c] = acc.finish();
  }
  return out;
}

/// Coordinate-form holomorphicity residual of phi = A(f) psi, with Gamma
/// evaluated at f(node).
inline std::array<ResidualReport, 3> coordinate_holomorphicity_residual(const SurfacePatch& patch,
                                                                       const LieGroupModel& model,
                                                                       int threads = 1) {
  const StripGrid& g = patch.grid;
  detail::require_stencil_room(g);
  if (patch.phi.size() != g.size()) throw Error("surface patch carries no phi field");
  std::vector<Vec3c> res(g.size());
  std::vector<std::uint8_t> ok(g.size(), 0);
  parallel_for(g.rows(), threads, [&](int j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      if (!patch.trusted[n]) continue;
      if (!model.in_chart(patch.points[n])) {
        throw ValidationError("surface leaves the chart domain at node (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
      const Tensor3 gamma = christoffel_at(model, patch.points[n]);
      const Vec3c& phi = patch.phi[n];
      Vec3c r{};
      for (int c = 0; c < 3; ++c) {
        cplx s = detail::dzbar(g, [&](int a, int b) { return patch.phi[g.index(a, b)][c]; }, i, j);
        for (int k = 0; k < 3; ++k) {
          for (int l = 0; l < 3; ++l) {
            if (gamma[c][k][l] != 0.0) s += gamma[c][k][l] * phi[k] * std::conj(phi[l]);
          }
        }
        r[c] = s;
      }
      res[n] = r;
      ok[n] = 1;
    }
  });
  std::array<ResidualReport, 3> out;
  for (int c = 0; c < 3; ++c) {
    ResidualAccumulator acc("coordinate_holomorphicity_" + std::to_string(c + 1));
    for (int j = 0; j < g.rows(); ++j) {
      for (int i = 0; i < g.n_u; ++i) {
        const std::size_t n = g.index(i, j);
        if (!ok[n]) {
          acc.exclude();
          continue;
        }
        acc.add(std::abs(res[n][c]), i, j);
      }
    }
    out[c] = acc.finish();
  }
  return out;
}

inline double max_of(const std::array<ResidualReport, 3>& r) {
  return std::fmax(r[0].max, std::fmax(r[1].max, r[2].max));
}

struct ImpliedThirdOptions {
  /// Nodes with |psi3| below this fraction of the field RMS are excluded.
  double psi3_threshold = 1e-8;
  /// Safety factor on the pointwise bound.
  double factor = 10.0;
  /// Absolute floor added to the bound (rounding level).
  double floor = 1e-13;
  /// Equations 1-2 must be at least this small for the check to apply.
  double tol12 = 1e-6;
};

struct ImpliedThirdReport {
  ResidualReport eq3;
  double eq12_max = 0.0;
  /// max over included nodes of |r3| / bound; <= 1 means the implication holds.
  double worst_ratio = 0.0;
  std::array<int, 2> worst_ratio_node{-1, -1};
  bool eq12_small = false;
  bool holds = false;
};

/// Checks that equation 3 follows from equations 1-2 and the quadratic
/// constraint. With Q = sum psi_i^2 and r_i the nodewise residuals,
///   psi3 r3 = (D Q - defect) / 2 - psi1 r1 - psi2 r2 - sum_i psi_i N_i(psi),
/// where defect = D Q - 2 sum psi_i D psi_i is the stencil's product-rule
/// error and sum_i psi_i N_i vanishes for antisymmetric L. The bound at each
/// node is factor * (|psi1 r1| + |psi2 r2| + |D Q|/2 + |defect|/2) / |psi3|.
inline ImpliedThirdReport implied_third_residual(const SpinorField& field, const Tensor3& L,
                                                 const ImpliedThirdOptions& opt = {}) {
  const StripGrid& g = field.grid;
  const auto res = frame_holomorphicity_field(field, L);
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < field.values.size(); ++n) {
    if (!field.trusted[n]) continue;
    const Spinor& p = field.values[n];
    sum_sq += std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]);
    ++count;
  }
  const double rms = count ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;

  ImpliedThirdReport out;
  ResidualAccumulator acc3("implied_third");
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      if (!field.trusted[n]) continue;
      out.eq12_max = std::fmax(out.eq12_max, std::fmax(std::abs(res[n][0]), std::abs(res[n][1])));
    }
  }
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      if (!field.trusted[n]) continue;
      const Spinor& p = field.values[n];
      if (std::abs(p[2]) < opt.psi3_threshold * rms) {
        acc3.exclude();
        continue;
      }
      const cplx dq = detail::dzbar(
          g, [&](int a, int b) {
            const Spinor& q = field.at(a, b);
            return q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
          },
          i, j);
      cplx product_rule = 0.0;
      for (int c = 0; c < 3; ++c) {
        product_rule += 2.0 * p[c] * detail::dzbar(g, [&](int a, int b) { return field.at(a, b)[c]; }, i, j);
      }
      const double defect = std::abs(dq - product_rule);
      const double bound = opt.factor *
                               (std::abs(p[0] * res[n][0]) + std::abs(p[1] * res[n][1]) +
                                0.5 * std::abs(dq) + 0.5 * defect) /
                               std::abs(p[2]) +
                           opt.floor;
      const double r3 = std::abs(res[n][2]);
      acc3.add(r3, i, j);
      const double ratio = r3 / bound;
      if (ratio > out.worst_ratio || out.worst_ratio_node[0] < 0) {
        out.worst_ratio = ratio;
        out.worst_ratio_node = {i, j};
      }
    }
  }
  out.eq3 = acc3.finish();
  out.eq12_small = out.eq12_max <= opt.tol12;
  out.holds = out.worst_ratio <= 1.0;
  return out;
}

}  // namespace bjorling
