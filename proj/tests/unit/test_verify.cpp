#include <gtest/gtest.h>

#include <cmath>

#include "bjorling/bjorling.hpp"
#include "bjorling/ck_solver.hpp"
#include "bjorling/surface.hpp"
#include "bjorling/verify.hpp"
#include "test_support.hpp"

using namespace bjorling;
namespace ts = bjorling::tsupport;

namespace {

Vec3d sphere_point(double u, double v) {
  const double s = 1.0 / std::cosh(v);
  return {std::cos(u) * s, std::sin(u) * s, std::tanh(v)};
}

struct Solved {
  LieGroupModel model;
  BjorlingData data;
  SpinorField field;
  SurfacePatch patch;
};

Solved solve(const std::string& model, const std::string& data, int n_u, int n_v, double eps, bool flip = false) {
  Solved s{builtin_model(model), builtin_data(data), {}, {}};
  const StripGrid g = make_grid(s.data.curve, n_u, n_v, eps);
  s.field = evolve_strip(initial_spinor_row(s.data, s.model, g, flip), s.model.connection, g);
  s.patch = reconstruct(s.data.curve, s.field, s.model);
  return s;
}

}  // namespace

TEST(InducedMetric, StretchedPlaneIsNotConformal) {
  const StripGrid g = ts::grid(8, 4, 1.0, 0.0, 1.0, false);
  const SurfacePatch p = ts::sample_patch(g, [](double u, double v) { return Vec3d{2 * u, v, 0.0}; });
  const auto r = induced_metric_residuals(p, builtin_model("euclidean"));
  EXPECT_NEAR(r.e_minus_g_raw, 3.0, 1e-12);
  EXPECT_NEAR(r.e_minus_g.max, 3.0 / 2.5, 1e-12);
  EXPECT_NEAR(r.f_raw, 0.0, 1e-12);
  EXPECT_THROW(mean_curvature_field(p, builtin_model("euclidean")), ValidationError);
}

TEST(GaussMapTest, PlaneNormalAndOrientation) {
  const StripGrid g = ts::grid(8, 4, 1.0, 0.0, 1.0, false);
  const SurfacePatch p = ts::sample_patch(g, [](double u, double v) { return Vec3d{u, v, 0.5}; });
  const GaussMap gm = gauss_map(p, builtin_model("euclidean"));
  for (std::size_t n = 0; n < g.size(); ++n) {
    ASSERT_TRUE(gm.ok[n]);
    EXPECT_NEAR(gm.normal[n][2], 1.0, 1e-14);
  }
  const auto mh = mean_curvature_field(p, builtin_model("euclidean"));
  EXPECT_LT(mh.abs_h.max, 1e-12);
  // The same plane read with a mirrored frame flips the normal.
  ModelSpec mirror;
  mirror.name = "mirrored";
  mirror.frame = {{{"0", "1", "0"}, {"1", "0", "0"}, {"0", "0", "1"}}};
  const GaussMap gm2 = gauss_map(p, load_model(mirror));
  EXPECT_NEAR(gm2.normal[0][2], 1.0, 1e-14);
}

TEST(GaussMapTest, DegenerateNodesCounted) {
  const StripGrid g = ts::grid(8, 4, 1.0, 0.0, 1.0, false);
  const SurfacePatch p = ts::sample_patch(g, [](double u, double) { return Vec3d{u, 0.0, 0.0}; });
  const GaussMap gm = gauss_map(p, builtin_model("euclidean"));
  EXPECT_EQ(gm.degenerate, g.size());
}

TEST(GaussMapTest, NormalIsMetricUnitAndOrthogonalInHeisenberg) {
  const Solved s = solve("heisenberg", "heisenberg_helicoid", 64, 16, 0.1);
  const PatchDerivatives d = patch_derivatives(s.patch);
  const GaussMap gm = gauss_map(s.patch, s.model, d);
  for (std::size_t n = 0; n < s.patch.points.size(); ++n) {
    if (!gm.ok[n]) continue;
    const Mat3d g = metric_at(s.model, s.patch.points[n]);
    EXPECT_NEAR(metric_dot(g, gm.normal[n], gm.normal[n]), 1.0, 1e-12);
    EXPECT_NEAR(metric_dot(g, gm.normal[n], d.f_u[n]), 0.0, 1e-12 * (1 + norm(d.f_u[n])));
    EXPECT_NEAR(metric_dot(g, gm.normal[n], d.f_v[n]), 0.0, 1e-12 * (1 + norm(d.f_v[n])));
  }
}

TEST(MeanCurvature, UnitSphereAndConvergence) {
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const StripGrid g = ts::grid(2 * n, n / 2, 0.8, 0.0, 2 * M_PI, true);
    const SurfacePatch p = ts::sample_patch(g, sphere_point);
    const auto mh = mean_curvature_field(p, builtin_model("euclidean"));
    double e = 0.0;
    for (double h : mh.h) e = std::fmax(e, std::fabs(std::fabs(h) - 1.0));
    err.push_back(e);
  }
  EXPECT_LT(err.back(), 1e-4);
  for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GT(std::log2(err[k - 1] / err[k]), 1.7);
}

TEST(MeanCurvature, CatenoidClosedFormIsMinimal) {
  const StripGrid g = ts::grid(256, 64, 0.5, 0.0, 2 * M_PI, true);
  const SurfacePatch p = ts::sample_patch(g, ts::catenoid_point);
  EXPECT_LT(mean_curvature_field(p, builtin_model("euclidean")).abs_h.max, 1e-6);
}

TEST(MeanCurvature, H3HorosphereHasUnitCurvature) {
  // The horosphere x3 = 1 in the upper half-space model has |H| = 1.
  const StripGrid g = ts::grid(16, 8, 0.5, -0.5, 0.5, false);
  const SurfacePatch p = ts::sample_patch(g, [](double u, double v) { return Vec3d{u, v, 1.0}; });
  const auto mh = mean_curvature_field(p, builtin_model("h3"));
  for (double h : mh.h) EXPECT_NEAR(std::fabs(h), 1.0, 1e-12);
}

TEST(Boundary, CatenoidSolvePassesAllChecks) {
  const Solved s = solve("euclidean", "circle_outward", 128, 64, 0.5);
  Thresholds th;
  const auto r = verify_solution(s.field, s.patch, s.data, s.model, th);
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.value;
  EXPECT_TRUE(r.passed());
  EXPECT_LT(r.boundary.position.max, 1e-15);
  EXPECT_LT(r.boundary.normal.max, 1e-10);
}

TEST(Boundary, FlippedOrientationFailsNormalCheck) {
  const Solved s = solve("euclidean", "circle_outward", 64, 16, 0.3, true);
  const auto r = verify_solution(s.field, s.patch, s.data, s.model);
  EXPECT_NEAR(r.boundary.normal.max, 2.0, 1e-8);
  EXPECT_FALSE(r.passed());
}

TEST(SchwarzOracle, MatchesCatenoidAndHelicoidClosedForms) {
  const auto e = builtin_model("euclidean");
  const auto cat = builtin_data("circle_outward");
  const StripGrid g = make_grid(cat.curve, 32, 8, 0.7);
  const SurfacePatch oc = euclidean_schwarz_oracle(cat, e, g);
  EXPECT_LT(patch_distance(oc, ts::sample_patch(g, ts::catenoid_point)).max, 1e-13);
  const auto hel = builtin_data("line_helicoid");
  const StripGrid gh = make_grid(hel.curve, 33, 8, 0.7);
  const SurfacePatch oh = euclidean_schwarz_oracle(hel, e, gh);
  EXPECT_LT(patch_distance(oh, ts::sample_patch(gh, ts::helicoid_point)).max, 1e-13);
}

TEST(SchwarzOracle, AgreesWithSolverOnTrustedNodes) {
  const Solved s = solve("euclidean", "line_helicoid", 129, 32, 0.3);
  const SurfacePatch o = euclidean_schwarz_oracle(s.data, s.model, s.patch.grid);
  EXPECT_LT(patch_distance(s.patch, o).max, 1e-6);
}

TEST(SchwarzOracle, RejectsUnsupportedInputs) {
  const StripGrid g = ts::grid(8, 2, 0.1, 0.0, 1.0, false);
  EXPECT_THROW(euclidean_schwarz_oracle(builtin_data("heisenberg_line"), builtin_model("heisenberg"), g),
               ValidationError);
  BjorlingSpec s = builtin_data_spec("line_helicoid");
  s.beta[0] = "sqrt(1 + u^2)";
  EXPECT_THROW(euclidean_schwarz_oracle(make_bjorling_data(s), builtin_model("euclidean"), g), ValidationError);
}

TEST(Agreement, RatioIsSymmetricWithFloor) {
  EXPECT_EQ(agreement_ratio(2.0, 1.0), 2.0);
  EXPECT_EQ(agreement_ratio(1.0, 2.0), 2.0);
  EXPECT_EQ(agreement_ratio(0.0, 0.0), 1.0);
  EXPECT_EQ(agreement_ratio(1e-11, 0.0), 10.0);
}

TEST(VerifyReport, HeisenbergLineFrameAndCoordinateResidualsAgree) {
  const Solved s = solve("heisenberg", "heisenberg_line", 128, 64, 0.1);
  Thresholds th;
  th.frame_holomorphicity = 1e-6;
  const auto r = verify_solution(s.field, s.patch, s.data, s.model, th);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(agreement_ratio(max_of(r.frame_holomorphicity), max_of(r.coordinate_holomorphicity)), 10.0);
  EXPECT_GT(r.regularity_margin, 0.0);
}
