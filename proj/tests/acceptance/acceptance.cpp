// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bjorling/pipeline.hpp"

using namespace bjorling;

namespace {

using Clock = std::chrono::steady_clock;

struct Run {
  LieGroupModel model;
  BjorlingData data;
  StripGrid grid;
  SpinorField field;
  SurfacePatch patch;
  VerificationReport report;
  double seconds = 0.0;
};

Run solve(const std::string& model, const std::string& data, int n_u, int n_v, double eps,
          SolveConfig cfg = {}, Thresholds th = {}) {
  const auto t0 = Clock::now();
  Run r;
  r.model = builtin_model(model);
  r.data = builtin_data(data);
  if (!validate(r.data, r.model).valid()) throw Error("invalid data " + data);
  r.grid = make_grid(r.data.curve, n_u, n_v, eps);
  r.field = evolve_strip(initial_spinor_row(r.data, r.model, r.grid), r.model.connection, r.grid, cfg);
  r.patch = reconstruct(r.data.curve, r.field, r.model);
  r.report = verify_solution(r.field, r.patch, r.data, r.model, th);
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

/// Max node distance to a closed form over trusted nodes.
double closed_form_error(const Run& r, const std::function<Vec3d(double, double)>& exact) {
  double e = 0.0;
  for (int j = 0; j < r.grid.rows(); ++j) {
    for (int i = 0; i < r.grid.n_u; ++i) {
      if (!r.patch.is_trusted(i, j)) continue;
      e = std::fmax(e, norm(r.patch.at(i, j) - exact(r.grid.u(i), r.grid.v(j))));
    }
  }
  return e;
}

double mean_curvature_max(const Run& r) {
  return r.report.mean_curvature ? r.report.mean_curvature->max : std::numeric_limits<double>::infinity();
}

double holomorphicity_ratio(const Run& r) {
  return agreement_ratio(max_of(r.report.frame_holomorphicity), max_of(r.report.coordinate_holomorphicity));
}

/// Collects sub-checks of one criterion and prints its line.
class Criterion {
 public:
  explicit Criterion(int id) : id_(id) {}

  void check(bool ok, const std::string& what, double value, double limit) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s=%.3g (limit %.3g)", what.c_str(), value, limit);
    if (!detail_.empty()) detail_ += "; ";
    detail_ += buf;
    passed_ = passed_ && ok;
  }
  void at_most(const std::string& what, double value, double limit) { check(value <= limit, what, value, limit); }
  void at_least(const std::string& what, double value, double limit) { check(value >= limit, what, value, limit); }
  void within(const std::string& what, double value, double lo, double hi) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s=%.3g (range [%.3g, %.3g])", what.c_str(), value, lo, hi);
    if (!detail_.empty()) detail_ += "; ";
    detail_ += buf;
    passed_ = passed_ && value >= lo && value <= hi;
  }
  void flag(const std::string& what, bool ok) {
    if (!detail_.empty()) detail_ += "; ";
    detail_ += what + (ok ? " ok" : " FAILED");
    passed_ = passed_ && ok;
  }
  void fail(const std::string& why) {
    if (!detail_.empty()) detail_ += "; ";
    detail_ += "error: " + why;
    passed_ = false;
  }
  bool report() const {
    std::printf("criterion %d: %s %s\n", id_, passed_ ? "PASS" : "FAIL", detail_.c_str());
    std::fflush(stdout);
    return passed_;
  }

 private:
  int id_;
  bool passed_ = true;
  std::string detail_;
};

Vec3d catenoid(double u, double v) { return {std::cosh(v) * std::cos(u), std::cosh(v) * std::sin(u), v}; }
Vec3d helicoid(double u, double v) { return {u, std::cos(u) * std::sinh(v), std::sin(u) * std::sinh(v)}; }

SolveConfig spectral() {
  SolveConfig c;
  c.scheme = DerivativeScheme::SpectralFourier;
  return c;
}

SolveConfig fd4(Formulation f = Formulation::AllThree) {
  SolveConfig c;
  c.scheme = DerivativeScheme::FiniteDifference4;
  c.formulation = f;
  return c;
}

// Shared runs, built once.
Run& catenoid_run() {
  static Run r = solve("euclidean", "circle_outward", 256, 128, 0.5, spectral());
  return r;
}
Run& helicoid_run() {
  static Run r = solve("euclidean", "line_helicoid", 128, 128, 0.5, fd4());
  return r;
}
Run& heisenberg_run() {
  static Run r = solve("heisenberg", "heisenberg_line", 128, 64, 0.1, fd4());
  return r;
}

bool criterion1() {
  Criterion c(1);
  try {
    const Run& r = catenoid_run();
    c.at_most("max node error", closed_form_error(r, catenoid), 1e-6);
    c.at_most("|N-V|", r.report.boundary.normal.max, 1e-6);
    c.at_most("max|H|", mean_curvature_max(r), 1e-6);
    c.at_most("runtime_s", r.seconds, 10.0);
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
  return c.report();
}

bool criterion2() {
  Criterion c(2);
  try {
    const Run& r = helicoid_run();
    c.at_most("max trusted node error", closed_form_error(r, helicoid), 1e-6);
    c.at_most("|N-V|", r.report.boundary.normal.max, 1e-6);
    c.at_most("max|H|", mean_curvature_max(r), 1e-6);
    std::size_t trusted = 0;
    for (auto t : r.patch.trusted) trusted += t;
    c.flag("trimmed sub-strip non-empty and proper", trusted > 0 && trusted < r.patch.trusted.size());
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
  return c.report();
}

bool criterion3() {
  Criterion c(3);
  try {
    for (Run* r : {&catenoid_run(), &helicoid_run()}) {
      const SurfacePatch oracle = euclidean_schwarz_oracle(r->data, r->model, r->grid);
      c.at_most(r->data.name + " oracle distance", patch_distance(r->patch, oracle).max, 1e-6);
    }
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
  return c.report();
}

bool criterion4() {
  Criterion c(4);
  try {
    const Run& r = heisenberg_run();
    const auto& v = r.report;
    c.at_most("frame holomorphicity", max_of(v.frame_holomorphicity), 1e-6);
    c.at_most("constraint drift", v.constraint_drift.max, 1e-8);
    c.at_most("conformality", std::fmax(v.conformality.e_minus_g.max, v.conformality.f.max), 1e-5);
    c.at_most("|f(u,0)-beta|", v.boundary.position.max, 1e-10);
    c.at_most("|N-V|_g", v.boundary.normal.max, 1e-6);
    c.at_most("max|H|", mean_curvature_max(r), 1e-4);
    c.at_most("integrability", v.integrability.max, 1e-4);
    c.at_most("runtime_s", r.seconds, 30.0);
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
  return c.report();
}

/// Random structure constants [e_j,e_k] = eps_{jkm} n^{ml} e_l + a_j e_k - a_k e_j,
/// n symmetric with n a = 0 (the Jacobi identity).
Tensor3 random_structure_constants(std::mt19937_64& g) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec3d a{};
  if (std::uniform_int_distribution<int>(0, 2)(g) != 0) {
    for (double& x : a) x = 1.5 * unit(g);
  }
  Mat3d m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) m[i][j] = m[j][i] = 2.0 * unit(g);
  }
  Mat3d n = m;
  const double aa = dot(a, a);
  if (aa > 0.0) {
    Mat3d p = identity3<double>();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) p[i][j] -= a[i] * a[j] / aa;
    }
    n = matmul(p, matmul(m, p));
  }
  auto eps = [](int i, int j, int k) { return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0; };
  Tensor3 c{};
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        double s = 0.0;
        for (int q = 0; q < 3; ++q) s += eps(j, k, q) * n[q][l];
        if (l == k) s += a[j];
        if (l == j) s -= a[k];
        c[l][j][k] = s;
      }
    }
  }
  return c;
}

double antisymmetry_defect(const Tensor3& L) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) worst = std::fmax(worst, std::fabs(L[i][j][k] + L[k][j][i]));
    }
  }
  return worst;
}

bool criterion5() {
  Criterion c(5);
  try {
    double worst = 0.0;
    for (const auto& name : builtin_model_names()) worst = std::fmax(worst, antisymmetry_defect(builtin_model(name).connection));
    std::mt19937_64 g(0x5eed0005ull);
    for (int t = 0; t < 100; ++t) {
      worst = std::fmax(worst, antisymmetry_defect(connection_coeffs_from_structure(random_structure_constants(g))));
    }
    c.at_most("(a) max|L^i_jk + L^k_ji|", worst, 0.0);

    const Run helix = solve("heisenberg", "heisenberg_helicoid", 128, 64, 0.2, fd4(Formulation::Reduced));
    const auto held = implied_third_residual(helix.field, helix.model.connection);
    c.at_most("(b) heisenberg_helicoid bound ratio", held.worst_ratio, 1.0);
    const auto cat = implied_third_residual(catenoid_run().field, catenoid_run().model.connection);
    c.at_most("(b) catenoid bound ratio", cat.worst_ratio, 1.0);

    Tensor3 broken = helix.model.connection;
    broken[0][1][2] += 0.1;
    const SpinorField bad =
        evolve_strip(initial_spinor_row(helix.data, helix.model, helix.grid), broken, helix.grid, fd4(Formulation::Reduced));
    const auto fails = implied_third_residual(bad, broken);
    c.check(fails.worst_ratio > 1.0, "(c) broken-L bound ratio", fails.worst_ratio, 1.0);
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
  return c.report();
}

/// Largest distance between a coarse patch and a nested finer one on the
/// coarse nodes (trusted in both).
double nested_distance(const Run& coarse, const Run& fine) {
  const int ru = (fine.grid.n_u - 1) / (coarse.grid.n_u - 1);
  const int rv = fine.grid.n_v / coarse.grid.n_v;
  double d = 0.0;
  for (int j = 0; j < coarse.grid.rows(); ++j) {
    for (int i = 0; i < coarse.grid.n_u; ++i) {
      const int fi = ru * i, fj = rv * j;
      if (!coarse.patch.is_trusted(i, j) || !fine.patch.is_trusted(fi, fj)) continue;
      d = std::fmax(d, norm(coarse.patch.at(i, j) - fine.patch.at(fi, fj)));
    }
  }
  return d;
}

bool criterion6() {
  Criterion c(6);
  try {
    // Uniqueness: three nested Heisenberg runs per data set. The finest
    // error is estimated by Richardson extrapolation for a fourth-order
    // method; the coarse-to-middle discrepancy must stay within the combined
    // estimates (plus a rounding floor).
    struct Level {
      const char* data;
      int n_u, n_v;
      double eps;
    };
    for (const Level& l : {Level{"heisenberg_line", 128, 64, 0.1}, Level{"heisenberg_helicoid", 64, 16, 0.2}}) {
      const Run r1 = solve("heisenberg", l.data, l.n_u, l.n_v, l.eps, fd4());
      const Run r2 = solve("heisenberg", l.data, 2 * (l.n_u - 1) + 1, 2 * l.n_v, l.eps, fd4());
      const Run r4 = solve("heisenberg", l.data, 4 * (l.n_u - 1) + 1, 4 * l.n_v, l.eps, fd4());
      const double d12 = nested_distance(r1, r2);
      const double d24 = nested_distance(r2, r4);
      const double e4 = d24 / 15.0;
      const double e2 = 16.0 * e4, e1 = 256.0 * e4;
      c.at_most(std::string(l.data) + " coarse/middle distance", d12, e1 + e2 + 1e-12);
    }

    // RK4 in v: Catenoid at eps = 1 with fixed spectral u-resolution.
    std::vector<double> err;
    const Run ref = solve("euclidean", "circle_outward", 64, 512, 1.0, spectral());
    for (int n_v : {8, 16, 32, 64}) {
      const Run r = solve("euclidean", "circle_outward", 64, n_v, 1.0, spectral());
      const int step = 512 / n_v;
      double e = 0.0;
      for (int j = 0; j < r.grid.rows(); ++j) {
        for (int i = 0; i < r.grid.n_u; ++i) {
          const Spinor& a = r.field.at(i, j);
          const Spinor& b = ref.field.at(i, step * j);
          for (int q = 0; q < 3; ++q) e = std::fmax(e, std::abs(a[q] - b[q]));
        }
      }
      err.push_back(e);
    }
    const double rk_slope = std::log2(err[0] / err[3]) / 3.0;
    c.within("RK4 slope", rk_slope, 3.5, 4.5);

    // Stencil residual order over three refinements on a closed-form field.
    std::vector<double> res;
    for (int n : {32, 64, 128, 256}) {
      StripGrid g;
      g.n_u = n + 1;
      g.n_v = n / 4;
      g.epsilon = 0.5;
      g.u_min = 0.0;
      g.u_max = 2.0;
      SpinorField f(g);
      for (int j = 0; j < g.rows(); ++j) {
        for (int i = 0; i < g.n_u; ++i) {
          const cplx z(g.u(i), g.v(j));
          f.at(i, j) = {-0.5 * std::sin(z), 0.5 * std::cos(z), cplx(0.0, -0.5)};
        }
      }
      res.push_back(max_of(frame_holomorphicity_residual(f, Tensor3{})));
    }
    const double st_slope = std::log2(res[0] / res[3]) / 3.0;
    c.within("stencil slope", st_slope, 1.7, 2.3);
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
  return c.report();
}

double frame_connection_gap(const LieGroupModel& m, std::mt19937_64& g) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Vec3d x;
    for (int i = 0; i < 3; ++i) {
      x[i] = std::uniform_real_distribution<double>(m.sample_box[i][0], m.sample_box[i][1])(g);
    }
    const Tensor3 via = frame_connection_via_christoffel(m, x);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) worst = std::fmax(worst, std::fabs(via[i][j][k] - m.connection[i][j][k]));
      }
    }
  }
  return worst;
}

bool criterion7() {
  Criterion c(7);
  try {
    for (Run* r : {&catenoid_run(), &helicoid_run(), &heisenberg_run()}) {
      c.at_most(r->data.name + " frame/coordinate ratio", holomorphicity_ratio(*r), 10.0);
    }
    std::mt19937_64 g(0x5eed0007ull);
    double worst = 0.0;
    for (const auto& name : builtin_model_names()) worst = std::fmax(worst, frame_connection_gap(builtin_model(name), g));
    c.at_most("max|L - L(Gamma)|", worst, 1e-8);
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
  return c.report();
}

bool criterion8() {
  Criterion c(8);
  try {
    RunOptions opt;
    opt.dry_run = true;
    const std::filesystem::path dir = BJORLING_CONFIG_DIR;
    const RunResult flipped = run_solve(load_job_config(dir / "catenoid_flipped.json"), opt);
    c.check(flipped.exit_code == kExitVerification, "flipped normal exit", flipped.exit_code, kExitVerification);
    const RunResult blow = run_solve(load_job_config(dir / "heisenberg_blowup.json"), opt);
    c.check(blow.exit_code == kExitAbort, "oversized eps exit", blow.exit_code, kExitAbort);

    const Run& cat = catenoid_run();
    SpinorField bar = cat.field;
    for (auto& p : bar.values) {
      for (auto& x : p) x = std::conj(x);
    }
    const SurfacePatch injected = reconstruct(cat.data.curve, bar, cat.model);
    c.at_least("conjugate-field integrability", integrability_residual(injected), 0.1);

    // Unit sphere in Mercator coordinates (conformal, |H| = 1).
    StripGrid g;
    g.n_u = 64;
    g.n_v = 16;
    g.epsilon = 0.8;
    g.u_min = 0.0;
    g.u_max = 6.283185307179586;
    g.periodic = true;
    SurfacePatch sphere(g);
    for (int j = 0; j < g.rows(); ++j) {
      for (int i = 0; i < g.n_u; ++i) {
        const double s = 1.0 / std::cosh(g.v(j));
        sphere.points[g.index(i, j)] = {std::cos(g.u(i)) * s, std::sin(g.u(i)) * s, std::tanh(g.v(j))};
      }
    }
    const auto mh = mean_curvature_field(sphere, builtin_model("euclidean"));
    double worst = 0.0;
    for (double h : mh.h) worst = std::fmax(worst, std::fabs(std::fabs(h) - 1.0));
    c.at_most("sphere ||H|-1|", worst, 0.05);
  } catch (const std::exception& e) {
    c.fail(e.what());
  }
  return c.report();
}

}  // namespace

int main() {
  bool ok = true;
  ok &= criterion1();
  ok &= criterion2();
  ok &= criterion3();
  ok &= criterion4();
  ok &= criterion5();
  ok &= criterion6();
  ok &= criterion7();
  ok &= criterion8();
  std::printf("acceptance: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}
