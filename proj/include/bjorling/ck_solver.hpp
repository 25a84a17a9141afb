#pragma once

// March of the holomorphicity system off the initial line v = 0:
//   d psi_i / dv = i (d psi_i / du + 2 sum_{j,k} L^i_{jk} conj(psi_j) psi_k),
// classical RK4 in v, u-derivatives by a filtered Fourier transform
// (periodic data) or fourth-order finite differences.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "bjorling/error.hpp"
#include "bjorling/fields.hpp"
#include "bjorling/models.hpp"
#include "bjorling/parallel.hpp"
#include "bjorling/stencil.hpp"
#include "bjorling/weierstrass.hpp"

namespace bjorling {

enum class DerivativeScheme { Auto, SpectralFourier, FiniteDifference4 };

/// AllThree evolves psi1..psi3 with their three equations; Reduced evolves
/// psi1, psi2 and sets psi3 to the root of -psi1^2 - psi2^2 nearest to its
/// previous value.
enum class Formulation { AllThree, Reduced };

inline std::string scheme_name(DerivativeScheme s) {
  switch (s) {
    case DerivativeScheme::SpectralFourier: return "spectral-fourier";
    case DerivativeScheme::FiniteDifference4: return "finite-difference-order-4";
    default: return "auto";
  }
}

inline DerivativeScheme parse_scheme(const std::string& s) {
  if (s == "spectral-fourier" || s == "spectral") return DerivativeScheme::SpectralFourier;
  if (s == "finite-difference-order-4" || s == "fd4") return DerivativeScheme::FiniteDifference4;
  if (s == "auto") return DerivativeScheme::Auto;
  throw ConfigError("unknown derivative scheme '" + s + "'");
}

struct SolveConfig {
  DerivativeScheme scheme = DerivativeScheme::Auto;
  /// Fraction of the spectrum (top end) damped by the exponential filter each
  /// step; 0 disables it. Spectral scheme only.
  double filter = 1.0 / 3.0;
  /// Fourier amplitudes below this fraction of the largest one are zeroed
  /// each step; 0 disables it. Spectral scheme only.
  double noise_floor = 1e-13;
  /// Abort when any |psi| exceeds this multiple of the initial RMS.
  double max_growth_factor = 1e3;
  /// Nodes closer than trust_margin * |v| to a non-periodic u-boundary are
  /// marked untrusted.
  double trust_margin = 2.0;
  Formulation formulation = Formulation::AllThree;
  int threads = 1;

  void validate() const {
    if (!(filter >= 0.0 && filter <= 1.0)) throw ConfigError("filter strength must lie in [0, 1]");
    if (!(noise_floor >= 0.0 && noise_floor < 1.0)) throw ConfigError("noise_floor must lie in [0, 1)");
    if (!(max_growth_factor > 1.0)) throw ConfigError("max_growth_factor must exceed 1");
    if (!(trust_margin >= 0.0)) throw ConfigError("trust_margin must be non-negative");
  }
};

struct SolveDiagnostics {
  DerivativeScheme scheme = DerivativeScheme::Auto;
  int steps = 0;
  double initial_rms = 0.0;
  /// max |psi| / initial RMS over the strip.
  double max_growth = 0.0;
  std::size_t untrusted_nodes = 0;
};

namespace detail {

/// Spectral first derivative and filtering of one periodic line.
class SpectralLine {
 public:
  SpectralLine(int n, double period) : n_(n), out_(n), wave_(n) {
    const double two_pi = 6.283185307179586;
    for (int m = 0; m < n; ++m) {
      int k = m <= n / 2 ? m : m - n;
      if (n % 2 == 0 && m == n / 2) k = 0;
      wave_[m] = two_pi * k / period;
    }
  }

  void derivative(std::vector<cplx>& line) {
    fft_.fwd(out_, line);
    for (int m = 0; m < n_; ++m) out_[m] *= cplx(0.0, wave_[m]);
    fft_.inv(line, out_);
  }

  void filter(std::vector<cplx>& line, double strength, double noise_floor) {
    if (strength <= 0.0 && noise_floor <= 0.0) return;
    fft_.fwd(out_, line);
    double peak = 0.0;
    for (const cplx& c : out_) peak = std::fmax(peak, std::abs(c));
    const double half = n_ / 2.0;
    for (int m = 0; m < n_; ++m) {
      const int k = m <= n_ / 2 ? m : n_ - m;
      const double eta = k / half;
      if (strength > 0.0 && eta > 1.0 - strength) {
        const double x = (eta - (1.0 - strength)) / strength;
        out_[m] *= std::exp(-36.0 * std::pow(x, 8));
      }
      if (std::abs(out_[m]) < noise_floor * peak) out_[m] = 0.0;
    }
    fft_.inv(line, out_);
  }

 private:
  int n_;
  Eigen::FFT<double> fft_;
  std::vector<cplx> out_;
  std::vector<double> wave_;
};

inline cplx nearest_root(cplx square, cplx reference) {
  const cplx r = std::sqrt(square);
  return std::abs(r - reference) <= std::abs(-r - reference) ? r : -r;
}

struct Marcher {
  const StripGrid& grid;
  const Tensor3& L;
  const SolveConfig& cfg;
  DerivativeScheme scheme;
  int comps;

  /// rhs = i (d psi/du + 2 N(psi)) for one row.
  void rhs(const std::vector<Spinor>& row, std::vector<Spinor>& out) const {
    const int n = grid.n_u;
    out.assign(n, Spinor{});
    if (scheme == DerivativeScheme::SpectralFourier) {
      SpectralLine line(n, grid.u_max - grid.u_min);
      std::vector<cplx> buf(n);
      for (int c = 0; c < comps; ++c) {
        for (int i = 0; i < n; ++i) buf[i] = row[i][c];
        line.derivative(buf);
        for (int i = 0; i < n; ++i) out[i][c] = buf[i];
      }
    } else {
      parallel_for(n, cfg.threads, [&](int i) {
        for (int c = 0; c < comps; ++c) {
          out[i][c] =
              stencil::apply([&](int k) { return row[k][c]; }, 1, 4, i, n, grid.h_u(), grid.periodic);
        }
      });
    }
    parallel_for(n, cfg.threads, [&](int i) {
      const Spinor conn = frame_connection_term(L, row[i]);
      for (int c = 0; c < comps; ++c) out[i][c] = cplx(0.0, 1.0) * (out[i][c] + 2.0 * conn[c]);
    });
  }

  void close_reduced(std::vector<Spinor>& row, const std::vector<Spinor>& reference) const {
    if (comps == 3) return;
    for (std::size_t i = 0; i < row.size(); ++i) {
      row[i][2] = nearest_root(-row[i][0] * row[i][0] - row[i][1] * row[i][1], reference[i][2]);
    }
  }

  void step(std::vector<Spinor>& row, double h) const {
    const std::size_t n = row.size();
    std::vector<Spinor> k1, k2, k3, k4, tmp(n);
    auto axpy = [&](const std::vector<Spinor>& k, double a) {
      for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < comps; ++c) tmp[i][c] = row[i][c] + a * k[i][c];
        if (comps < 3) tmp[i][2] = row[i][2];
      }
      close_reduced(tmp, row);
    };
    rhs(row, k1);
    axpy(k1, 0.5 * h);
    rhs(tmp, k2);
    axpy(k2, 0.5 * h);
    rhs(tmp, k3);
    axpy(k3, h);
    rhs(tmp, k4);
    const std::vector<Spinor> previous = row;
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < comps; ++c) {
        row[i][c] += (h / 6.0) * (k1[i][c] + 2.0 * k2[i][c] + 2.0 * k3[i][c] + k4[i][c]);
      }
    }
    if (scheme == DerivativeScheme::SpectralFourier) {
      SpectralLine line(static_cast<int>(n), grid.u_max - grid.u_min);
      std::vector<cplx> buf(n);
      for (int c = 0; c < comps; ++c) {
        for (std::size_t i = 0; i < n; ++i) buf[i] = row[i][c];
        line.filter(buf, cfg.filter, cfg.noise_floor);
        for (std::size_t i = 0; i < n; ++i) row[i][c] = buf[i];
      }
    }
    close_reduced(row, previous);
  }
};

}  // namespace detail

inline DerivativeScheme resolve_scheme(DerivativeScheme s, const StripGrid& grid) {
  if (s == DerivativeScheme::Auto) {
    return grid.periodic ? DerivativeScheme::SpectralFourier : DerivativeScheme::FiniteDifference4;
  }
  if (s == DerivativeScheme::SpectralFourier && !grid.periodic) {
    throw ConfigError("the spectral-fourier scheme requires periodic data");
  }
  return s;
}

/// Solves the Cauchy problem on the strip. Row centre_row() equals psi0
/// bitwise; the two half-strips are marched independently.
inline SpinorField evolve_strip(const std::vector<Spinor>& psi0, const Tensor3& L, const StripGrid& grid,
                                const SolveConfig& config = {}, SolveDiagnostics* diagnostics = nullptr) {
  grid.validate();
  config.validate();
  if (psi0.size() != static_cast<std::size_t>(grid.n_u)) throw Error("initial row size does not match n_u");
  const DerivativeScheme scheme = resolve_scheme(config.scheme, grid);
  if (scheme == DerivativeScheme::FiniteDifference4 && grid.n_u < 6) {
    throw ConfigError("fourth-order differences need n_u >= 6");
  }

  double sum = 0.0;
  for (const Spinor& p : psi0) {
    for (const cplx& x : p) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw Error("initial spinor is not finite");
    }
    sum += std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]);
  }
  const double rms = std::sqrt(sum / static_cast<double>(psi0.size()));
  const double limit = config.max_growth_factor * std::fmax(rms, 1e-300);

  SpinorField field(grid);
  const int centre = grid.centre_row();
  for (int i = 0; i < grid.n_u; ++i) field.at(i, centre) = psi0[i];

  const detail::Marcher marcher{grid, L, config, scheme,
                                config.formulation == Formulation::Reduced ? 2 : 3};
  double max_mag = rms;
  for (int dir : {1, -1}) {
    std::vector<Spinor> row = psi0;
    for (int s = 1; s <= grid.n_v; ++s) {
      marcher.step(row, dir * grid.h_v());
      const int j = centre + dir * s;
      for (int i = 0; i < grid.n_u; ++i) {
        const Spinor& p = row[i];
        const double mag = std::sqrt(std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]));
        if (!std::isfinite(mag)) {
          throw SolverAbort("non-finite value in the march", grid.v(j));
        }
        if (mag > limit) {
          throw SolverAbort("blowup: |psi| exceeded max_growth_factor x initial RMS", grid.v(j));
        }
        max_mag = std::fmax(max_mag, mag);
        field.at(i, j) = p;
      }
    }
  }

  std::size_t untrusted = 0;
  if (!grid.periodic) {
    for (int j = 0; j < grid.rows(); ++j) {
      const double reach = config.trust_margin * std::fabs(grid.v(j));
      for (int i = 0; i < grid.n_u; ++i) {
        const double u = grid.u(i);
        const double dist = std::fmin(u - grid.u_min, grid.u_max - u);
        if (dist < reach) {
          field.trusted[grid.index(i, j)] = 0;
          ++untrusted;
        }
      }
    }
  }

  if (diagnostics) {
    diagnostics->scheme = scheme;
    diagnostics->steps = 2 * grid.n_v;
    diagnostics->initial_rms = rms;
    diagnostics->max_growth = rms > 0.0 ? max_mag / rms : 0.0;
    diagnostics->untrusted_nodes = untrusted;
  }
  return field;
}

/// max over trusted nodes of |psi1^2 + psi2^2 + psi3^2| / RMS^2, RMS of
/// |psi| over the same nodes.
inline ResidualReport constraint_drift_report(const SpinorField& field) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < field.values.size(); ++n) {
    if (!field.trusted[n]) continue;
    const Spinor& p = field.values[n];
    sum += std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]);
    ++count;
  }
  const double ms = count ? sum / static_cast<double>(count) : 0.0;
  ResidualAccumulator acc("constraint_drift");
  for (int j = 0; j < field.grid.rows(); ++j) {
    for (int i = 0; i < field.grid.n_u; ++i) {
      if (!field.is_trusted(i, j)) {
        acc.exclude();
        continue;
      }
      const Spinor& p = field.at(i, j);
      const double q = std::abs(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      acc.add(ms > 0.0 ? q / ms : q, i, j);
    }
  }
  return acc.finish();
}

inline double constraint_drift(const SpinorField& field) { return constraint_drift_report(field).max; }

}  // namespace bjorling
