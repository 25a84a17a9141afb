#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "bjorling/error.hpp"
#include "bjorling/linalg.hpp"

namespace bjorling {

using cplx = std::complex<double>;

/// Discretization of the strip I x (-eps, eps). Rows j = 0 .. 2 n_v carry
/// v = (j - n_v) h_v, so row n_v is the initial line v = 0.
struct StripGrid {
  int n_u = 64;
  double u_min = 0.0;
  double u_max = 1.0;
  int n_v = 16;
  double epsilon = 0.1;
  bool periodic = false;
  double u0 = 0.0;  // base point z0 = (u0, 0)

  double h_u() const { return (u_max - u_min) / (periodic ? n_u : n_u - 1); }
  double h_v() const { return epsilon / n_v; }
  int rows() const { return 2 * n_v + 1; }
  int centre_row() const { return n_v; }
  std::size_t size() const { return static_cast<std::size_t>(n_u) * rows(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_u + i; }
  double u(int i) const { return u_min + i * h_u(); }
  double v(int j) const { return (j - n_v) * h_v(); }

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("strip half-width epsilon must be positive");
    if (n_u < 8) throw ConfigError("n_u must be at least 8");
    if (n_v < 1) throw ConfigError("n_v must be at least 1");
    if (!(u_max > u_min)) throw ConfigError("u_range must satisfy u_min < u_max");
  }
};

using Spinor = std::array<cplx, 3>;

/// psi = (psi1, psi2, psi3) at every node of a strip grid.
struct SpinorField {
  StripGrid grid;
  std::vector<Spinor> values;
  std::vector<std::uint8_t> trusted;

  SpinorField() = default;
  explicit SpinorField(const StripGrid& g)
      : grid(g), values(g.size(), Spinor{}), trusted(g.size(), 1) {}

  Spinor& at(int i, int j) { return values[grid.index(i, j)]; }
  const Spinor& at(int i, int j) const { return values[grid.index(i, j)]; }
  bool is_trusted(int i, int j) const { return trusted[grid.index(i, j)] != 0; }
};

/// Reconstructed immersion on the strip grid.
struct SurfacePatch {
  StripGrid grid;
  std::vector<Vec3d> points;
  std::vector<Vec3d> f_u;
  std::vector<Vec3d> f_v;
  /// phi = A(f) psi per node; empty when the patch was not built from a field.
  std::vector<Vec3c> phi;
  std::vector<std::uint8_t> trusted;
  std::string model_name;
  std::string config_hash;

  SurfacePatch() = default;
  explicit SurfacePatch(const StripGrid& g)
      : grid(g), points(g.size(), Vec3d{}), trusted(g.size(), 1) {}

  const Vec3d& at(int i, int j) const { return points[grid.index(i, j)]; }
  bool is_trusted(int i, int j) const { return trusted[grid.index(i, j)] != 0; }
};

/// Max/RMS summary of a nodewise quantity.
struct ResidualReport {
  std::string name;
  double max = 0.0;
  double rms = 0.0;
  std::array<int, 2> worst_node{-1, -1};
  std::size_t excluded_nodes = 0;
  std::size_t evaluated_nodes = 0;
};

/// Sequential accumulator; nodes must be fed in a fixed order so that results
/// are reproducible bit for bit.
class ResidualAccumulator {
 public:
  explicit ResidualAccumulator(std::string name) { report_.name = std::move(name); }

  void add(double value, int i, int j) {
    // NaN dominates so that a corrupted node is always reported.
    const bool worse = report_.worst_node[0] < 0 || value > report_.max ||
                       (std::isnan(value) && !std::isnan(report_.max));
    if (worse) {
      report_.max = value;
      report_.worst_node = {i, j};
    }
    sum_sq_ += value * value;
    ++report_.evaluated_nodes;
  }
  void exclude() { ++report_.excluded_nodes; }

  ResidualReport finish() const {
    ResidualReport r = report_;
    r.rms = r.evaluated_nodes ? std::sqrt(sum_sq_ / static_cast<double>(r.evaluated_nodes)) : 0.0;
    return r;
  }

 private:
  ResidualReport report_;
  double sum_sq_ = 0.0;
};

}  // namespace bjorling
