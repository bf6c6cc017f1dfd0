#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fastdiff/energy.hpp"
#include "fastdiff/grid.hpp"

using namespace fastdiff;

namespace {

constexpr double kPi = std::numbers::pi;

MeshSpec interval(int n, double length = 1.0) {
  MeshSpec s;
  s.kind = MeshKind::Interval1D;
  s.n = n;
  s.length = length;
  return s;
}

MeshSpec rectangle(int nx, int ny, double lx = 1.0, double ly = 1.0) {
  MeshSpec s;
  s.kind = MeshKind::Rectangle2D;
  s.nx = nx;
  s.ny = ny;
  s.length_x = lx;
  s.length_y = ly;
  return s;
}

MeshSpec ball(int n, double radius = 1.0) {
  MeshSpec s;
  s.kind = MeshKind::RadialBall3D;
  s.n = n;
  s.radius = radius;
  return s;
}

std::vector<MeshSpec> all_specs() {
  return {interval(3), interval(17, 2.5), rectangle(5, 7, 1.5, 0.5), rectangle(9, 9),
          ball(2), ball(12, 0.7)};
}

ProblemParams params_ab(int a, int b) { return ProblemParams::make(0.5, 2, 2, a, b, 0, 1); }

double domain_volume(const MeshSpec& s) {
  switch (s.kind) {
    case MeshKind::Interval1D: return s.length;
    case MeshKind::Rectangle2D: return s.length_x * s.length_y;
    default: return 4.0 / 3.0 * kPi * s.radius * s.radius * s.radius;
  }
}

double boundary_measure(const MeshSpec& s) {
  switch (s.kind) {
    case MeshKind::Interval1D: return 2.0;
    case MeshKind::Rectangle2D: return 2.0 * (s.length_x + s.length_y);
    default: return 4.0 * kPi * s.radius * s.radius;
  }
}

}  // namespace

TEST(BuildMesh, IntervalExample) {
  const Mesh m = build_mesh(interval(3));
  ASSERT_EQ(m.bulk_size(), 3u);
  EXPECT_DOUBLE_EQ(m.bulk_weights(0), 0.25);
  EXPECT_DOUBLE_EQ(m.bulk_weights(1), 0.5);
  EXPECT_DOUBLE_EQ(m.bulk_weights(2), 0.25);
  ASSERT_EQ(m.boundary_size(), 2u);
  EXPECT_EQ(m.boundary_weights(0), 1.0);
  EXPECT_EQ(m.boundary_weights(1), 1.0);
}

TEST(BuildMesh, BallBoundaryIsSphere) {
  for (int n : {2, 5, 40}) {
    const Mesh m = build_mesh(ball(n));
    ASSERT_EQ(m.boundary_size(), 1u);
    EXPECT_NEAR(m.boundary_weights(0), 12.566371, 1e-6);
  }
}

TEST(BuildMesh, RectanglePerimeter) {
  for (auto [nx, ny] : {std::pair{2, 2}, {4, 9}, {16, 16}})
    EXPECT_NEAR(build_mesh(rectangle(nx, ny)).boundary_weights.sum(), 4.0, 1e-12);
}

TEST(BuildMesh, Rejects) {
  EXPECT_THROW(build_mesh(interval(1)), MeshError);
  EXPECT_THROW(build_mesh(interval(4, -1.0)), MeshError);
  EXPECT_THROW(build_mesh(rectangle(1, 4)), MeshError);
  EXPECT_THROW(build_mesh(rectangle(4, 4, 0.0, 1.0)), MeshError);
  EXPECT_THROW(build_mesh(ball(1)), MeshError);
  EXPECT_THROW(build_mesh(ball(4, 0.0)), MeshError);
}

TEST(MeshInvariants, MeasuresMatchGeometry) {
  for (const auto& s : all_specs()) {
    const Mesh m = build_mesh(s);
    EXPECT_NEAR(m.bulk_weights.sum(), domain_volume(s), 1e-10 * domain_volume(s));
    EXPECT_NEAR(m.boundary_weights.sum(), boundary_measure(s), 1e-10 * boundary_measure(s));
    EXPECT_GT(m.bulk_weights.minCoeff(), 0.0);
  }
}

TEST(MeshInvariants, StiffnessAnnihilatesConstants) {
  for (const auto& s : all_specs()) {
    const Mesh m = build_mesh(s);
    const Vector ones = Vector::Ones(m.bulk_size());
    const Vector onesb = Vector::Ones(m.boundary_size());
    EXPECT_LE((m.stiffness_bulk * ones).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + m.stiffness_bulk.norm()));
    if (m.boundary_size())
      EXPECT_LE((m.stiffness_boundary * onesb).cwiseAbs().maxCoeff(),
                1e-12 * (1.0 + m.stiffness_boundary.norm()));
  }
}

TEST(MeshInvariants, MMatrixOffDiagonals) {
  for (const auto& s : all_specs()) {
    const Mesh m = build_mesh(s);
    for (int k = 0; k < m.stiffness_bulk.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m.stiffness_bulk, k); it; ++it)
        if (it.row() != it.col()) ASSERT_LE(it.value(), 0.0);
  }
}

TEST(MeshInvariants, StiffnessSymmetric) {
  for (const auto& s : all_specs()) {
    const Mesh m = build_mesh(s);
    const SparseMatrix kt = m.stiffness_bulk.transpose();
    EXPECT_LE((m.stiffness_bulk - kt).norm(), 1e-14);
    const SparseMatrix kbt = m.stiffness_boundary.transpose();
    EXPECT_LE((m.stiffness_boundary - kbt).norm(), 1e-14);
  }
}

TEST(MeshInvariants, TraceMapInjective) {
  for (const auto& s : all_specs()) {
    const Mesh m = build_mesh(s);
    std::vector<int> idx = m.trace_map;
    std::sort(idx.begin(), idx.end());
    EXPECT_EQ(std::adjacent_find(idx.begin(), idx.end()), idx.end());
  }
}

TEST(Phi1Form, Examples) {
  const Mesh m = build_mesh(interval(9));
  const FieldPair one = FieldPair::from_bulk(m, Vector::Ones(9));
  EXPECT_NEAR(phi1_form(m, one, params_ab(1, 0)), 0.5, 1e-14);
  EXPECT_NEAR(phi1_form(m, one, params_ab(0, 1)), 1.0, 1e-14);
  EXPECT_EQ(phi1_form(m, FieldPair::zero(m), params_ab(1, 0)), 0.0);
}

TEST(Phi1Form, DimensionMismatch) {
  const Mesh m = build_mesh(interval(5));
  FieldPair z = FieldPair::zero(m);
  z.bulk.resize(4);
  EXPECT_THROW(phi1_form(m, z, params_ab(1, 0)), MeshError);
}

TEST(Phi1Form, CoerciveOnRandomFields) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  for (const auto& s : all_specs()) {
    const Mesh m = build_mesh(s);
    for (auto [a, b] : {std::pair{1, 0}, {0, 1}}) {
      double worst = INFINITY;
      for (int i = 0; i < 1000; ++i) {
        Vector z(m.bulk_size());
        for (auto& v : z) v = nd(gen);
        const FieldPair zp = FieldPair::from_bulk(m, z);
        worst = std::min(worst, phi1_form(m, zp, params_ab(a, b)) / z.squaredNorm());
      }
      EXPECT_GT(worst, 0.0);
    }
  }
}

TEST(Phi1Form, BilinearFormSymmetric) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> nd;
  for (const auto& s : all_specs()) {
    const Mesh m = build_mesh(s);
    const SparseMatrix A = m.form_operator(1, 0);
    for (int i = 0; i < 50; ++i) {
      Vector u(m.bulk_size()), v(m.bulk_size());
      for (auto& x : u) x = nd(gen);
      for (auto& x : v) x = nd(gen);
      const double uv = u.dot(A * v), vu = v.dot(A * u);
      EXPECT_NEAR(uv, vu, 1e-12 * (1.0 + std::abs(uv)));
    }
  }
}

TEST(Phi1Form, PolarizationMatchesOperator) {
  // phi_1(z) = z^T A z / 2 with A = form_operator(a, b).
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  for (const auto& s : all_specs()) {
    const Mesh m = build_mesh(s);
    for (auto [a, b] : {std::pair{1, 0}, {0, 1}}) {
      Vector z(m.bulk_size());
      for (auto& x : z) x = nd(gen);
      const double lhs = phi1_form(m, FieldPair::from_bulk(m, z), params_ab(a, b));
      const double rhs = 0.5 * z.dot(m.form_operator(a, b) * z);
      EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST(Phi1Form, SecondOrderRefinementOnSine) {
  // z = sin(pi x) on [0,1]: phi_1 = pi^2/4 + 1/4 with (a,b) = (1,0).
  const double exact = kPi * kPi / 4.0 + 0.25;
  double prev_err = 0.0;
  for (int level = 0; level < 5; ++level) {
    const int n = 8 * (1 << level) + 1;
    const Mesh m = build_mesh(interval(n));
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = std::sin(kPi * i / (n - 1.0));
    const double err = std::abs(phi1_form(m, FieldPair::from_bulk(m, z), params_ab(1, 0)) - exact);
    if (level > 0) {
      const double ratio = prev_err / err;
      EXPECT_GT(ratio, 3.6) << n;
      EXPECT_LT(ratio, 4.4) << n;
    }
    prev_err = err;
  }
}

TEST(Phi1Form, RectangleRefinementConverges) {
  // z = sin(pi x) sin(pi y) on the unit square: |grad z|^2 integrates to
  // pi^2/2, |z|^2 to 1/4; boundary terms vanish.
  const double exact = 0.5 * (kPi * kPi / 2.0 + 0.25);
  double prev_err = 0.0;
  for (int level = 0; level < 4; ++level) {
    const int n = 8 * (1 << level) + 1;
    const Mesh m = build_mesh(rectangle(n, n));
    Vector z(m.bulk_size());
    for (std::size_t i = 0; i < m.bulk_size(); ++i)
      z(i) = std::sin(kPi * m.coords[i][0]) * std::sin(kPi * m.coords[i][1]);
    const double err = std::abs(phi1_form(m, FieldPair::from_bulk(m, z), params_ab(1, 0)) - exact);
    if (level > 0) EXPECT_GT(prev_err / err, 3.5) << n;
    prev_err = err;
  }
}

TEST(Phi1Form, BallRefinementConverges) {
  // z = 1 - r^2 on the unit ball: int |grad z|^2 = 16 pi / 5 and
  // int z^2 = 32 pi / 105; boundary value is zero.
  const double exact = 0.5 * (16.0 * kPi / 5.0 + 32.0 * kPi / 105.0);
  double prev_err = 0.0;
  for (int level = 0; level < 4; ++level) {
    const int n = 16 * (1 << level) + 1;
    const Mesh m = build_mesh(ball(n));
    Vector z(n);
    for (int i = 0; i < n; ++i) z(i) = 1.0 - m.coords[i][0] * m.coords[i][0];
    const double err = std::abs(phi1_form(m, FieldPair::from_bulk(m, z), params_ab(1, 0)) - exact);
    EXPECT_LT(err / exact, 0.05) << n;
    if (level > 0) EXPECT_GT(prev_err / err, 1.8) << n;
    prev_err = err;
  }
}

TEST(TraceResidual, Examples) {
  const Mesh m = build_mesh(interval(6));
  const FieldPair z = FieldPair::from_bulk(m, Vector::LinSpaced(6, 0.0, 1.0));
  EXPECT_EQ(trace_residual(m, z), 0.0);
  FieldPair bad = FieldPair::from_bulk(m, Vector::Ones(6));
  bad.boundary.setConstant(2.0);
  EXPECT_EQ(trace_residual(m, bad), 1.0);
}

TEST(FieldPair, FromBulkRejectsWrongSize) {
  const Mesh m = build_mesh(interval(6));
  EXPECT_THROW(FieldPair::from_bulk(m, Vector::Ones(5)), MeshError);
}

TEST(Mesh, CustomValidatesParts) {
  SparseMatrix k1(1, 1);
  EXPECT_NO_THROW(Mesh::custom(Vector::Ones(1), Vector(), k1, SparseMatrix(0, 0), {}));
  EXPECT_THROW(Mesh::custom(Vector::Ones(1), Vector::Ones(1), k1, SparseMatrix(1, 1), {3}),
               MeshError);
  EXPECT_THROW(Mesh::custom(Vector::Ones(2), Vector(), k1, SparseMatrix(0, 0), {}), MeshError);
}

TEST(Mesh, EffectiveWeightsAddBoundaryMass) {
  const Mesh m = build_mesh(interval(5));
  const Vector w = m.effective_weights();
  EXPECT_DOUBLE_EQ(w(0), m.bulk_weights(0) + 1.0);
  EXPECT_DOUBLE_EQ(w(2), m.bulk_weights(2));
  EXPECT_DOUBLE_EQ(w(4), m.bulk_weights(4) + 1.0);
}
