#pragma once

// Reconstruction of the immersion from psi: per u-column, f(u, 0) = beta(u)
// and df/dv = -2 Im(A(f) psi) integrated by RK4 in v, both directions.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bjorling/bjorling.hpp"
#include "bjorling/error.hpp"
#include "bjorling/fields.hpp"
#include "bjorling/models.hpp"
#include "bjorling/parallel.hpp"
#include "bjorling/stencil.hpp"

namespace bjorling {

namespace detail {

/// psi at the midpoint between rows j and j + dir by cubic interpolation on
/// four consecutive rows (window shifted inward at the strip edges).
inline Spinor half_step_spinor(const SpinorField& field, int i, int j, int dir) {
  const int rows = field.grid.rows();
  const int a = std::min(j, j + dir);  // midpoint lies between rows a and a+1
  if (rows < 4) {
    Spinor out{};
    for (int c = 0; c < 3; ++c) out[c] = 0.5 * (field.at(i, a)[c] + field.at(i, a + 1)[c]);
    return out;
  }
  int start = a - 1;
  start = std::max(0, std::min(start, rows - 4));
  // Lagrange weights on nodes 0..3 evaluated at t = a + 1/2 - start.
  const double t = a + 0.5 - start;
  double w[4];
  for (int m = 0; m < 4; ++m) {
    double num = 1.0, den = 1.0;
    for (int q = 0; q < 4; ++q) {
      if (q == m) continue;
      num *= t - q;
      den *= m - q;
    }
    w[m] = num / den;
  }
  Spinor out{};
  for (int m = 0; m < 4; ++m) {
    const Spinor& p = field.at(i, start + m);
    for (int c = 0; c < 3; ++c) out[c] += w[m] * p[c];
  }
  return out;
}

inline Vec3c frame_to_coordinates(const Mat3d& a, const Spinor& psi) {
  Vec3c phi{};
  for (int r = 0; r < 3; ++r) phi[r] = a[r][0] * psi[0] + a[r][1] * psi[1] + a[r][2] * psi[2];
  return phi;
}

/// -2 Im(A(f) psi), or nullopt when f has left the chart or A is singular.
inline std::optional<Vec3d> v_velocity(const LieGroupModel& model, const Vec3d& f, const Spinor& psi) {
  if (!model.in_chart(f)) return std::nullopt;
  Mat3d a;
  try {
    a = frame_at(model, f);
  } catch (const Error&) {
    return std::nullopt;
  }
  const Vec3c phi = frame_to_coordinates(a, psi);
  return Vec3d{-2.0 * phi[0].imag(), -2.0 * phi[1].imag(), -2.0 * phi[2].imag()};
}

}  // namespace detail

/// Builds the surface patch. Columns leaving the chart are cut: the remaining
/// nodes are set to NaN and marked untrusted.
inline SurfacePatch reconstruct(const AnalyticCurve& beta, const SpinorField& field, const LieGroupModel& model,
                                int threads = 1) {
  const StripGrid& g = field.grid;
  SurfacePatch patch(g);
  patch.model_name = model.name;
  patch.trusted = field.trusted;
  patch.phi.assign(g.size(), Vec3c{});
  patch.f_u.assign(g.size(), Vec3d{});
  patch.f_v.assign(g.size(), Vec3d{});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int centre = g.centre_row();
  const double h = g.h_v();

  parallel_for(g.n_u, threads, [&](int i) {
    const Vec3d start = beta.position(g.u(i));
    if (!model.in_chart(start)) throw ValidationError("curve leaves the chart at u=" + std::to_string(g.u(i)));
    patch.points[g.index(i, centre)] = start;
    for (int dir : {1, -1}) {
      Vec3d f = start;
      bool alive = true;
      for (int s = 0; s < g.n_v; ++s) {
        const int j = centre + dir * s;
        const int jn = j + dir;
        const double step = dir * h;
        if (alive) {
          const Spinor mid = detail::half_step_spinor(field, i, j, dir);
          const auto k1 = detail::v_velocity(model, f, field.at(i, j));
          const auto k2 = k1 ? detail::v_velocity(model, f + (0.5 * step) * *k1, mid) : std::nullopt;
          const auto k3 = k2 ? detail::v_velocity(model, f + (0.5 * step) * *k2, mid) : std::nullopt;
          const auto k4 = k3 ? detail::v_velocity(model, f + step * *k3, field.at(i, jn)) : std::nullopt;
          if (k4) {
            f = f + (step / 6.0) * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
            if (!model.in_chart(f)) alive = false;
          } else {
            alive = false;
          }
        }
        const std::size_t n = g.index(i, jn);
        if (alive) {
          patch.points[n] = f;
        } else {
          patch.points[n] = {nan, nan, nan};
          patch.trusted[n] = 0;
        }
      }
    }
    for (int j = 0; j < g.rows(); ++j) {
      const std::size_t n = g.index(i, j);
      const Vec3d& p = patch.points[n];
      if (!std::isfinite(p[0])) {
        patch.phi[n] = {cplx(nan, nan), cplx(nan, nan), cplx(nan, nan)};
        patch.f_u[n] = patch.f_v[n] = {nan, nan, nan};
        continue;
      }
      const Vec3c phi = detail::frame_to_coordinates(frame_at(model, p), field.values[n]);
      patch.phi[n] = phi;
      patch.f_u[n] = {2.0 * phi[0].real(), 2.0 * phi[1].real(), 2.0 * phi[2].real()};
      patch.f_v[n] = {-2.0 * phi[0].imag(), -2.0 * phi[1].imag(), -2.0 * phi[2].imag()};
    }
  });
  return patch;
}

/// max over trusted nodes of |df/du - 2 Re phi| / RMS |phi|, df/du by
/// fourth-order differences along u.
inline ResidualReport integrability_report(const SurfacePatch& patch) {
  const StripGrid& g = patch.grid;
  if (patch.phi.size() != g.size()) throw Error("surface patch carries no phi field");
  if (g.n_u < 6) throw Error("integrability check needs n_u >= 6");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!patch.trusted[n]) continue;
    const Vec3c& p = patch.phi[n];
    sum += std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]);
    ++count;
  }
  const double rms = count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
  ResidualAccumulator acc("integrability");
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      if (!patch.trusted[n]) {
        acc.exclude();
        continue;
      }
      const Vec3d du =
          stencil::apply([&](int k) { return patch.points[g.index(k, j)]; }, 1, 4, i, g.n_u, g.h_u(), g.periodic);
      const Vec3c& p = patch.phi[n];
      const Vec3d d = du - Vec3d{2.0 * p[0].real(), 2.0 * p[1].real(), 2.0 * p[2].real()};
      acc.add(rms > 0.0 ? norm(d) / rms : norm(d), i, j);
    }
  }
  return acc.finish();
}

inline double integrability_residual(const SurfacePatch& patch) { return integrability_report(patch).max; }

enum class MeshFormat { Obj, Ply };

inline MeshFormat parse_mesh_format(const std::string& s) {
  if (s == "obj") return MeshFormat::Obj;
  if (s == "ply") return MeshFormat::Ply;
  throw ConfigError("unknown mesh format '" + s + "' (expected obj or ply)");
}

namespace detail {

struct MeshTopology {
  std::vector<std::size_t> vertices;      // patch node index per output vertex
  std::vector<std::array<int, 4>> quads;  // 0-based output vertex indices
};

inline MeshTopology mesh_topology(const SurfacePatch& patch) {
  const StripGrid& g = patch.grid;
  const std::size_t total = static_cast<std::size_t>(g.n_u) * g.rows();
  std::vector<int> id(total, -1);
  MeshTopology t;
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      const Vec3d& p = patch.points[n];
      if (!patch.trusted[n] || !std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) continue;
      id[n] = static_cast<int>(t.vertices.size());
      t.vertices.push_back(n);
    }
  }
  const int cols = g.periodic ? g.n_u : g.n_u - 1;
  for (int j = 0; j + 1 < g.rows(); ++j) {
    for (int i = 0; i < cols; ++i) {
      const int i1 = (i + 1) % g.n_u;
      const int a = id[g.index(i, j)], b = id[g.index(i1, j)], c = id[g.index(i1, j + 1)], d = id[g.index(i, j + 1)];
      if (a >= 0 && b >= 0 && c >= 0 && d >= 0) t.quads.push_back({a, b, c, d});
    }
  }
  return t;
}

}  // namespace detail

/// Writes trusted nodes as a quad mesh in chart coordinates. `normals`, when
/// given, holds one normal per patch node (written to PLY only).
inline void export_mesh(const SurfacePatch& patch, MeshFormat format, const std::string& path,
                        const std::vector<Vec3d>* normals = nullptr) {
  const detail::MeshTopology t = detail::mesh_topology(patch);
  if (t.vertices.empty()) throw Error("cannot export mesh: no trusted nodes");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  if (format == MeshFormat::Obj) {
    char buf[128];
    out << "# surface patch, model " << patch.model_name << "\n";
    for (std::size_t n : t.vertices) {
      const Vec3d& p = patch.points[n];
      std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p[0], p[1], p[2]);
      out << buf;
    }
    for (const auto& q : t.quads) out << "f " << q[0] + 1 << ' ' << q[1] + 1 << ' ' << q[2] + 1 << ' ' << q[3] + 1 << '\n';
  } else {
    static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << t.vertices.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property float nx\nproperty float ny\nproperty float nz\n"
        << "element face " << t.quads.size() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    for (std::size_t n : t.vertices) {
      float rec[6];
      const Vec3d& p = patch.points[n];
      Vec3d nv{0.0, 0.0, 0.0};
      if (normals && n < normals->size() && std::isfinite((*normals)[n][0])) nv = (*normals)[n];
      for (int c = 0; c < 3; ++c) {
        rec[c] = static_cast<float>(p[c]);
        rec[3 + c] = static_cast<float>(nv[c]);
      }
      out.write(reinterpret_cast<const char*>(rec), sizeof rec);
    }
    for (const auto& q : t.quads) {
      const unsigned char k = 4;
      out.write(reinterpret_cast<const char*>(&k), 1);
      const std::int32_t idx[4] = {q[0], q[1], q[2], q[3]};
      out.write(reinterpret_cast<const char*>(idx), sizeof idx);
    }
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

/// CSV table: i, j, u, v, f1, f2, f3, trust.
inline void write_patch_csv(const SurfacePatch& patch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const StripGrid& g = patch.grid;
  out << "i,j,u,v,f1,f2,f3,trust\n";
  char buf[256];
  for (int j = 0; j < g.rows(); ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      const std::size_t n = g.index(i, j);
      const Vec3d& p = patch.points[n];
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", i, j, g.u(i), g.v(j), p[0], p[1],
                    p[2], patch.trusted[n] ? 1 : 0);
      out << buf;
    }
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace bjorling
