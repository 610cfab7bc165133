#include "mpoc/fe_space.hpp"
#include "mpoc/forms.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace mpoc;

TEST(FeSpace, NodeCounts) {
  for (int r = 0; r <= 3; ++r) {
    const SpaceSet s = build_spaces(fixtures::square(r));
    const int n = 1 << r;
    EXPECT_EQ(s.n_vertices, (n + 1) * (n + 1));
    EXPECT_EQ(s.n_nodes, (2 * n + 1) * (2 * n + 1));
    EXPECT_EQ(static_cast<int>(s.boundary_nodes.size()), 8 * n);
    EXPECT_EQ(static_cast<int>(s.interior_nodes.size()), (2 * n - 1) * (2 * n - 1));
    EXPECT_EQ(s.quad.size(), static_cast<size_t>(s.cells()) * kQuadPoints);
  }
}

TEST(FeSpace, BasisPartitionOfUnityAndQuadratureExactness) {
  const SpaceSet s = build_spaces(fixtures::square(2));
  double area = 0.0, m2 = 0.0, m4 = 0.0;
  for (const auto& q : s.quad) {
    double sum = 0.0;
    Vec2 gsum = Vec2::Zero();
    for (int i = 0; i < 6; ++i) {
      sum += q.phi[i];
      gsum += q.grad[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_NEAR(gsum.norm(), 0.0, 1e-12);
    area += q.w;
    m2 += q.w * q.x.x() * q.x.y();
    m4 += q.w * std::pow(q.x.x(), 4);
  }
  EXPECT_NEAR(area, 1.0, 1e-14);
  EXPECT_NEAR(m2, 0.25, 1e-14);
  EXPECT_NEAR(m4, 0.2, 1e-14);
}

TEST(FeSpace, InterpolationReproducesQuadratics) {
  const SpaceSet s = build_spaces(fixtures::square(1));
  auto f = [](const Vec2& x) { return 1 + 2 * x.x() - x.y() + 3 * x.x() * x.y() - x.x() * x.x(); };
  const QuadField fq = scalar_at_quad(s, interpolate_scalar(s, f));
  for (size_t k = 0; k < s.quad.size(); ++k) EXPECT_NEAR(fq[k], f(s.quad[k].x), 1e-13);
}

TEST(FeSpace, NodeClassification) {
  const SpaceSet s = build_spaces(fixtures::square(2));
  for (int n = 0; n < s.n_nodes; ++n) {
    const Vec2 x = s.nodes[n];
    const bool left = x.x() == 0.0, right = x.x() == 1.0, wall = x.y() == 0.0 || x.y() == 1.0;
    const auto k = s.vel_kind[n];
    if (left) EXPECT_EQ(k, VelocityNodeKind::Gamma0);
    else if (right && !wall) EXPECT_EQ(k, VelocityNodeKind::Control);
    else if (wall) EXPECT_TRUE(k == VelocityNodeKind::Slip || k == VelocityNodeKind::Zero);
    else EXPECT_EQ(k, VelocityNodeKind::Interior);
  }
  // Slip tangents are unit vectors along the walls.
  for (int n = 0; n < s.n_nodes; ++n)
    if (s.vel_kind[n] == VelocityNodeKind::Slip) EXPECT_NEAR(std::abs(s.slip_tangent[n].x()), 1.0, 1e-15);
}

TEST(FeSpace, HomogeneousBasisRespectsConstraints) {
  const SpaceSet s = build_spaces(fixtures::square(2));
  const int N = s.n_nodes;
  const Matrix P = Matrix(s.P);
  for (int n = 0; n < N; ++n) {
    if (s.vel_kind[n] == VelocityNodeKind::Interior) continue;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (s.vel_kind[n] == VelocityNodeKind::Slip) EXPECT_EQ(P(N + n, j), 0.0);  // walls are horizontal
      else {
        EXPECT_EQ(P(n, j), 0.0);
        EXPECT_EQ(P(N + n, j), 0.0);
      }
    }
  }
  // Columns are orthonormal.
  EXPECT_NEAR((P.transpose() * P - Matrix::Identity(P.cols(), P.cols())).norm(), 0.0, 1e-13);
}
