#include "mpoc/mesh.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mpoc;

namespace {

Mesh parse(const std::string& text) {
  std::istringstream in(text);
  return parse_mesh(in, "test");
}

const std::string kHeader = "mesh2d v1\nvertices 4\n0 0\n1 0\n1 1\n0 1\ntriangles 2\n0 1 2\n0 2 3\n";

}  // namespace

TEST(Mesh, LoadsSample) {
  const Mesh m = fixtures::square(0);
  EXPECT_EQ(m.vertices.size(), 4u);
  EXPECT_NEAR(m.total_area(), 1.0, 1e-15);
  EXPECT_NEAR(m.boundary_length(), 4.0, 1e-15);
}

TEST(Mesh, RefinementPreservesGeometryAndTags) {
  Mesh m = fixtures::square(0);
  for (int level = 1; level <= 3; ++level) {
    m = refine_uniform(m);
    EXPECT_EQ(m.triangles.size(), 2u << (2 * level));
    EXPECT_NEAR(m.total_area(), 1.0, 1e-13);
    EXPECT_NEAR(m.boundary_length(), 4.0, 1e-13);
    EXPECT_NEAR(m.max_edge_length(), std::sqrt(2.0) / (1 << level), 1e-14);
    const BoundaryArc arc = gamma0_arclength(m);
    EXPECT_NEAR(arc.length(), 1.0, 1e-14);
    EXPECT_EQ(arc.edges.size(), static_cast<size_t>(1 << level));
    for (size_t i = 1; i < arc.cumulative.size(); ++i) EXPECT_GT(arc.cumulative[i], arc.cumulative[i - 1]);
  }
}

TEST(Mesh, ArcStartsAtOriginAndRunsIntoGamma0) {
  const Mesh m = fixtures::square(2);
  const BoundaryArc arc = gamma0_arclength(m);
  EXPECT_EQ(arc.vertices.front(), m.arc_length_origin);
  EXPECT_EQ(m.vertices[arc.vertices.front()], Vec2(0, 0));
  EXPECT_EQ(m.vertices[arc.vertices.back()], Vec2(0, 1));
  EXPECT_EQ(arc.direction, -1);  // Γ0 is the left edge; from (0,0) it runs clockwise
}

TEST(Mesh, BoundaryLoopIsClosedAndCounterclockwise) {
  const Mesh m = fixtures::square(1);
  const auto loop = boundary_loop(m);
  ASSERT_EQ(loop.size(), m.boundary_edges.size());
  double signed_area = 0.0;
  for (size_t i = 0; i < loop.size(); ++i) {
    const auto& e = m.boundary_edges[loop[i]];
    EXPECT_EQ(e.b, m.boundary_edges[loop[(i + 1) % loop.size()]].a);
    const Vec2 a = m.vertices[e.a], b = m.vertices[e.b];
    signed_area += 0.5 * (a.x() * b.y() - b.x() * a.y());
  }
  EXPECT_NEAR(signed_area, 1.0, 1e-14);
}

TEST(Mesh, RepairsOrientation) {
  const Mesh m = parse("mesh2d v1\nvertices 4\n0 0\n1 0\n1 1\n0 1\ntriangles 2\n0 2 1\n0 3 2\n"
                       "bedges 4\n0 3 G0 G0\n1 2 G1 G3\n0 1 G2 G3\n2 3 G2 G3\ngamma0_origin 0\n");
  for (int t = 0; t < 2; ++t) EXPECT_GT(m.triangle_area(t), 0.0);
}

TEST(Mesh, WriteParseRoundTrip) {
  const Mesh m = fixtures::square(1);
  std::ostringstream out;
  write_mesh(out, m);
  const Mesh back = parse(out.str());
  EXPECT_EQ(back.vertices, m.vertices);
  EXPECT_EQ(back.triangles, m.triangles);
  EXPECT_EQ(back.boundary_edges.size(), m.boundary_edges.size());
}

TEST(Mesh, RejectsInvalidInput) {
  const std::string tags = "bedges 4\n3 0 G0 G0\n1 2 G1 G3\n0 1 G2 G3\n2 3 G2 G3\n";
  EXPECT_THROW(parse(kHeader + tags + "gamma0_origin 1\n"), InputError);  // origin not on Γ0
  EXPECT_THROW(parse(kHeader + "bedges 3\n3 0 G0 G0\n1 2 G1 G3\n0 1 G2 G3\ngamma0_origin 0\n"), InputError);
  EXPECT_THROW(parse(kHeader + "bedges 4\n3 0 G0 G3\n1 2 G1 G3\n0 1 G2 G3\n2 3 G2 G3\ngamma0_origin 0\n"),
               InputError);  // rotation Γ0 differs from velocity Γ0
  EXPECT_THROW(parse(kHeader + "bedges 4\n3 0 G0 G0\n1 2 G2 G3\n0 1 G2 G3\n2 3 G2 G3\ngamma0_origin 0\n"),
               InputError);  // Γ1 empty
  EXPECT_THROW(parse("mesh2d v1\nvertices 3\n0 0\n1 0\n2 0\ntriangles 1\n0 1 2\n"), InputError);  // degenerate
  EXPECT_THROW(parse("mesh2d v2\n"), InputError);
  EXPECT_THROW(load_mesh("/nonexistent/file.mesh"), InputError);
}

TEST(Mesh, SeparationCheck) {
  const Mesh m = fixtures::square(1);
  EXPECT_FALSE(gammas_separated(m));  // Γ2 walls touch Γ0 and Γ1 at the corners
  std::ostringstream out;
  write_mesh(out, fixtures::square(0));
  std::istringstream in(out.str());
  EXPECT_THROW(parse_mesh(in, "strict", {true}), InputError);
}
