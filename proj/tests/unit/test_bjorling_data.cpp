#include <gtest/gtest.h>

#include <cmath>

#include "bjorling/bjorling.hpp"
#include "test_support.hpp"

using namespace bjorling;
namespace ts = bjorling::tsupport;

namespace {

const cplx I(0.0, 1.0);

BjorlingData data_from(std::array<std::string, 3> beta, std::array<std::string, 3> v, double a, double b,
                       bool periodic = false) {
  BjorlingSpec s;
  s.name = "test";
  s.beta = beta;
  s.normal = v;
  s.u_min = a;
  s.u_max = b;
  s.periodic = periodic;
  return make_bjorling_data(s);
}

}  // namespace

TEST(Validate, BuiltinDataValidInTheirModels) {
  const auto e = builtin_model("euclidean");
  const auto h = builtin_model("heisenberg");
  EXPECT_TRUE(validate(builtin_data("circle_outward"), e).valid());
  EXPECT_TRUE(validate(builtin_data("line_helicoid"), e).valid());
  EXPECT_TRUE(validate(builtin_data("heisenberg_line"), h).valid());
  EXPECT_TRUE(validate(builtin_data("heisenberg_helicoid"), h).valid());
  const auto c = validate(builtin_data("circle_outward"), e, 64);
  EXPECT_EQ(c.n_samples, 64);
  EXPECT_NEAR(c.min_speed, 1.0, 1e-14);
  EXPECT_LT(c.max_unit_defect, 1e-15);
}

TEST(Validate, NonOrthogonalFieldReportsWitness) {
  const auto d = data_from({"cos(u)", "sin(u)", "0"}, {"1", "0", "0"}, 0.0, 2 * M_PI, true);
  const auto c = validate(d, builtin_model("euclidean"));
  ASSERT_FALSE(c.valid());
  EXPECT_NEAR(c.max_orthogonality, 1.0, 1e-15);
  EXPECT_NEAR(std::sin(c.orthogonality_witness), 1.0, 1e-12);
  EXPECT_NEAR(c.orthogonality_witness, M_PI / 2, 1e-12);
  EXPECT_NE(c.violations.front().find("orthogonal"), std::string::npos);
}

TEST(Validate, UsesModelMetricNotEuclideanDot) {
  const auto he = builtin_model("heisenberg");
  const auto eu = builtin_model("euclidean");
  const auto vertical = data_from({"u", "0", "0"}, {"0", "0", "1"}, -1.0, 1.0);
  EXPECT_TRUE(validate(vertical, he).valid());
  // V = E2 along the x1-axis: unit for the Heisenberg metric only.
  const auto tilted = data_from({"u", "0", "0"}, {"0", "1", "u/2"}, -1.0, 1.0);
  EXPECT_TRUE(validate(tilted, he).valid());
  EXPECT_FALSE(validate(tilted, eu).valid());
}

TEST(Validate, ChartExitAndSingularCurve) {
  const auto h3 = builtin_model("h3");
  const auto out = data_from({"u", "0", "u"}, {"0", "1", "0"}, -1.0, 1.0);
  const auto c = validate(out, h3);
  ASSERT_FALSE(c.valid());
  EXPECT_NE(c.violations.front().find("chart"), std::string::npos);
  const auto still = data_from({"0", "0", "0"}, {"0", "0", "1"}, 0.0, 1.0);
  const auto s = validate(still, builtin_model("euclidean"));
  ASSERT_FALSE(s.valid());
  EXPECT_NE(s.violations.front().find("regular"), std::string::npos);
}

TEST(GeodesicNormal, CircleGivesInwardNormal) {
  const auto d = builtin_data("circle_outward");
  const auto e = builtin_model("euclidean");
  const NormalField n = geodesic_normal(d.curve, e);
  for (double u : {0.0, 0.7, 2.0, 4.5}) {
    const Vec3d v = n.at(u);
    EXPECT_NEAR(v[0], -std::cos(u), 1e-12);
    EXPECT_NEAR(v[1], -std::sin(u), 1e-12);
    EXPECT_NEAR(v[2], 0.0, 1e-12);
  }
  BjorlingData g{"geo", d.curve, n};
  EXPECT_TRUE(validate(g, e).valid());
}

TEST(GeodesicNormal, ErrorsOnLineAndNonArcLength) {
  const auto e = builtin_model("euclidean");
  EXPECT_THROW(geodesic_normal(builtin_data("line_helicoid").curve, e), ValidationError);
  const auto fast = data_from({"cos(2*u)", "sin(2*u)", "0"}, {"0", "0", "1"}, 0.0, M_PI, true);
  try {
    geodesic_normal(fast.curve, e);
    FAIL();
  } catch (const ValidationError& ex) {
    EXPECT_NE(std::string(ex.what()).find("arc length"), std::string::npos);
  }
}

TEST(GeodesicNormal, HeisenbergMatchesFrameTransportOracle) {
  // The circle (cos t, sin t, 0) has Heisenberg speed sqrt(1.25); rescale to arc length.
  const auto he = builtin_model("heisenberg");
  const double k = 1.0 / std::sqrt(1.25);
  const auto d = data_from({"cos(u/sqrt(1.25))", "sin(u/sqrt(1.25))", "0"}, {"0", "0", "1"}, 0.0,
                           2 * M_PI / k, true);
  const NormalField n = geodesic_normal(d.curve, he);
  BjorlingData g{"geo", d.curve, n};
  EXPECT_TRUE(validate(g, he).valid());
  // Oracle: frame components b(u) = A^{-1} beta', differentiated by central
  // differences, plus the frame connection L^i_{jk} b_j b_k.
  auto frame_velocity = [&](double u) {
    const double t = k * u;
    const Vec3d x{std::cos(t), std::sin(t), 0.0};
    const Vec3d vel{-k * std::sin(t), k * std::cos(t), 0.0};
    return matvec(inverse(frame_at(he, x)), vel);
  };
  for (double u : {0.0, 1.0, 2.5, 4.0}) {
    const double h = 1e-4;
    const Vec3d bp = frame_velocity(u + h), bm = frame_velocity(u - h), b = frame_velocity(u);
    Vec3d acc{};
    for (int i = 0; i < 3; ++i) {
      acc[i] = (bp[i] - bm[i]) / (2 * h);
      for (int j = 0; j < 3; ++j) {
        for (int l = 0; l < 3; ++l) acc[i] += he.connection[i][j][l] * b[j] * b[l];
      }
    }
    const double len = norm(acc);
    const Vec3d expect = matvec(frame_at(he, d.curve.position(u)), (1.0 / len) * acc);
    const Vec3d got = n.at(u);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], expect[i], 1e-6) << u;
  }
}

TEST(InitialSpinor, CircleAndLineClosedForms) {
  const auto e = builtin_model("euclidean");
  const auto circle = builtin_data("circle_outward");
  const auto line = builtin_data("line_helicoid");
  for (double u : {-2.0, 0.0, 0.4, 1.3, 3.0}) {
    const Spinor p = initial_spinor(circle, e, u);
    EXPECT_NEAR(std::abs(p[0] - 0.5 * -std::sin(u)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(p[1] - 0.5 * std::cos(u)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(p[2] - 0.5 * -I), 0.0, 1e-15);
    const Spinor q = initial_spinor(line, e, u);
    EXPECT_NEAR(std::abs(q[0] - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(q[1] + 0.5 * I * std::cos(u)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(q[2] + 0.5 * I * std::sin(u)), 0.0, 1e-15);
    const Spinor f = initial_spinor(circle, e, u, true);
    EXPECT_NEAR(std::abs(f[2] - 0.5 * I), 0.0, 1e-15);
  }
}

TEST(InitialSpinor, RejectsInvalidData) {
  const auto d = data_from({"cos(u)", "sin(u)", "0"}, {"1", "0", "0"}, 0.0, 2 * M_PI, true);
  EXPECT_THROW(initial_spinor(d, builtin_model("euclidean"), 1.0), ValidationError);
}

TEST(InitialSpinor, InvariantsOnRandomValidData) {
  // Random valid data through a point: beta(u) = x0 + u t0 in coordinates,
  // V built from a frame-orthonormal completion rotating in u.
  auto g = ts::rng(31);
  for (const auto& name : builtin_model_names()) {
    const auto m = builtin_model(name);
    for (int trial = 0; trial < 25; ++trial) {
      Vec3d x;
      for (int i = 0; i < 3; ++i) x[i] = ts::uniform(g, m.sample_box[i][0], m.sample_box[i][1]);
      const Mat3d a = frame_at(m, x);
      const Mat3d r = ts::random_rotation(g);
      const double speed = ts::uniform(g, 0.3, 3.0);
      const Vec3d bf{speed * r[0][0], speed * r[1][0], speed * r[2][0]};
      const Vec3d wf{r[0][1], r[1][1], r[2][1]};
      const Vec3d vel = matvec(a, bf), v = matvec(a, wf);
      auto txt = [](double c) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.17g", c);
        return std::string(buf);
      };
      BjorlingSpec s;
      s.name = "random";
      for (int i = 0; i < 3; ++i) {
        s.beta[i] = txt(x[i]) + " + (" + txt(vel[i]) + ")*u";
        s.normal[i] = txt(v[i]);
      }
      s.u_min = -1e-3;
      s.u_max = 1e-3;
      const auto d = make_bjorling_data(s);
      const Spinor p = initial_spinor(d, m, 0.0);
      const double mass = std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]);
      EXPECT_LE(std::abs(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]), 1e-12 * mass);
      const double speed_g = std::sqrt(metric_dot(metric_at(m, x), vel, vel));
      EXPECT_NEAR(mass, 0.5 * speed_g * speed_g, 1e-10 * (1.0 + speed_g * speed_g));
    }
  }
}

TEST(InitialSpinor, FrameCrossProductIsMetricCrossProduct) {
  // g(a x_g b, X) = vol_g(a, b, X) gives a x_g b = sqrt(det G) G^{-1} (a x b).
  auto g = ts::rng(32);
  for (const auto& name : builtin_model_names()) {
    const auto m = builtin_model(name);
    for (int trial = 0; trial < 50; ++trial) {
      Vec3d x, p, q;
      for (int i = 0; i < 3; ++i) {
        x[i] = ts::uniform(g, m.sample_box[i][0], m.sample_box[i][1]);
        p[i] = ts::uniform(g, -1, 1);
        q[i] = ts::uniform(g, -1, 1);
      }
      const Mat3d a = frame_at(m, x);
      const Mat3d ainv = inverse(a);
      const Vec3d frame_form = matvec(a, cross(matvec(ainv, p), matvec(ainv, q)));
      const Mat3d gm = metric_at(m, x);
      const Vec3d metric_form = matvec(inverse(gm), std::sqrt(det(gm)) * cross(p, q));
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(frame_form[i], metric_form[i], 1e-9 * (1.0 + norm(metric_form)));
    }
  }
}

TEST(InitialSpinor, RowMatchesPointwiseAndGridShape) {
  const auto d = builtin_data("circle_outward");
  const auto e = builtin_model("euclidean");
  const StripGrid grid = make_grid(d.curve, 32, 8, 0.3);
  EXPECT_TRUE(grid.periodic);
  EXPECT_NEAR(grid.h_u(), 2 * M_PI / 32, 1e-15);
  const auto row = initial_spinor_row(d, e, grid);
  ASSERT_EQ(row.size(), 32u);
  for (int i = 0; i < 32; ++i) EXPECT_EQ(row[i], initial_spinor(d, e, grid.u(i)));
}

TEST(BuiltinData, UnknownNameAndBadRange) {
  EXPECT_THROW(builtin_data("nope"), ConfigError);
  EXPECT_THROW(data_from({"u", "0", "0"}, {"0", "0", "1"}, 1.0, 0.0), ConfigError);
  EXPECT_THROW(data_from({"u +", "0", "0"}, {"0", "0", "1"}, 0.0, 1.0), ParseError);
}
