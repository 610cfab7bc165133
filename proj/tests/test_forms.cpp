#include "mpoc/forms.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mpoc;

namespace {

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1, 1);
  Vector v(n);
  for (auto& x : v) x = uni(rng);
  return v;
}

}  // namespace

TEST(Forms, SymmetricOperators) {
  const SpaceSet s = build_spaces(fixtures::square(2));
  for (const SparseMatrix& A : {assemble_A(s, 0.0), assemble_A(s, 2.0), assemble_Atilde(s), assemble_mass(s),
                                assemble_vector_gram(s), assemble_rotrot(s), assemble_slip_mass(s)})
    EXPECT_LT(symmetry_defect(A), 1e-14);
}

TEST(Forms, RigidMotionsInKernelOfStrain) {
  const SpaceSet s = build_spaces(fixtures::square(2));
  const SparseMatrix A = assemble_A(s, 0.0);
  for (const VectorField& f : {VectorField([](const Vec2&) { return Vec2(1, 0); }),
                               VectorField([](const Vec2&) { return Vec2(0, 1); }),
                               VectorField([](const Vec2& x) { return Vec2(-x.y(), x.x()); })})
    EXPECT_LT((A * interpolate_vector(s, f)).norm(), 1e-13);
}

TEST(Forms, MassAndLoadIntegrateArea) {
  const SpaceSet s = build_spaces(fixtures::square(2));
  const Vector one = Vector::Ones(s.n_nodes);
  EXPECT_NEAR(one.dot(assemble_mass(s) * one), 1.0, 1e-14);
  const QuadField ones(s.quad.size(), 1.0), zeros(s.quad.size(), 0.0);
  const Vector load = assemble_load(s, nullptr, ones, zeros);
  EXPECT_NEAR(load.head(s.n_nodes).sum(), 1.0, 1e-14);
  EXPECT_NEAR(load.tail(s.n_nodes).sum(), 0.0, 1e-14);
  EXPECT_NEAR(assemble_scalar_load(s, &ones, ones).sum(), 1.0, 1e-14);
  EXPECT_NEAR(one.dot(assemble_slip_mass(s).topLeftCorner(s.n_nodes, s.n_nodes) * one), 2.0, 1e-14);
}

TEST(Forms, DivergenceOfSolenoidalQuadraticVanishes) {
  const SpaceSet s = build_spaces(fixtures::square(1));
  const SparseMatrix D = assemble_divergence(s);
  const Vector u = interpolate_vector(s, [](const Vec2& x) {
    return Vec2(x.x() * x.x() + x.y(), -2 * x.x() * x.y() + x.x());
  });
  EXPECT_LT((D * u).norm(), 1e-14);
  const Vector v = interpolate_vector(s, [](const Vec2& x) { return Vec2(x.x(), 0.0); });
  const Vector q = Vector::Ones(s.n_vertices);
  EXPECT_NEAR(q.dot(D * v), -1.0, 1e-14);  // -(1, div v) = -1
}

TEST(Forms, RotationCouplingsAreAdjointOnHomogeneousFields) {
  const SpaceSet s = build_spaces(fixtures::square(2));
  const SparseMatrix Rw = assemble_rot_coupling(s), Ru = assemble_rot_coupling_u(s);
  std::mt19937_64 rng(5);
  Vector u = s.P * random_vector(s.P.cols(), rng);
  Vector w = s.Q * random_vector(s.Q.cols(), rng);
  // (rot w, u) = (w, rot u) when the fields vanish on the boundary.
  for (int n : s.boundary_nodes) u[n] = u[s.n_nodes + n] = 0.0;
  EXPECT_NEAR(u.dot(Rw * w), w.dot(Ru * u), 1e-12);
  // rot of (y, -x) is -2.
  const Vector r = interpolate_vector(s, [](const Vec2& x) { return Vec2(x.y(), -x.x()); });
  EXPECT_NEAR(Vector::Ones(s.n_nodes).dot(Ru * r), -2.0, 1e-13);
}

TEST(Forms, SkewTransportMatchesDefinition) {
  const SpaceSet s = build_spaces(fixtures::square(1));
  std::mt19937_64 rng(6);
  QuadField rho(s.quad.size());
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  for (auto& r : rho) r = pos(rng);
  const Vector a = random_vector(2 * s.n_nodes, rng), e = random_vector(2 * s.n_nodes, rng),
               v = random_vector(2 * s.n_nodes, rng);
  const SparseMatrix B = assemble_B(s, rho, a), Bf = assemble_B_first_slot(s, rho, e);
  EXPECT_NEAR(v.dot(B * e), v.dot(Bf * a), 1e-12);
  EXPECT_NEAR(v.dot(B * e), -e.dot(B * v), 1e-12);
  const Vector w = random_vector(s.n_nodes, rng), z = random_vector(s.n_nodes, rng);
  const SparseMatrix Bt = assemble_Btilde(s, rho, a), Btf = assemble_Btilde_first_slot(s, rho, w);
  EXPECT_NEAR(z.dot(Bt * w), z.dot(Btf * a), 1e-12);
  const SparseMatrix C = assemble_convection(s, rho, a);
  EXPECT_NEAR(z.dot(Bt * w), 0.5 * (z.dot(C * w) - w.dot(C * z)), 1e-12);
}

TEST(Forms, ThreadCountDoesNotChangeResults) {
  const SpaceSet s = build_spaces(fixtures::square(3));
  std::mt19937_64 rng(7);
  QuadField rho(s.quad.size(), 1.3);
  const Vector a = random_vector(2 * s.n_nodes, rng);
  set_assembly_threads(1);
  const SparseMatrix B1 = assemble_B(s, rho, a), A1 = assemble_A(s, 0.5);
  set_assembly_threads(4);
  const SparseMatrix B4 = assemble_B(s, rho, a), A4 = assemble_A(s, 0.5);
  set_assembly_threads(1);
  EXPECT_EQ(Matrix(B1 - B4).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(Matrix(A1 - A4).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Forms, NonPositiveDensityIsReported) {
  const SpaceSet s = build_spaces(fixtures::square(1));
  QuadField rho(s.quad.size(), 1.0);
  EXPECT_NO_THROW(check_positive_density(s, rho));
  rho[5] = 0.0;
  EXPECT_THROW(check_positive_density(s, rho), NumericalError);
}
