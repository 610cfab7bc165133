#include "mpoc/problem.hpp"
#include "mpoc/stream_density.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace mpoc;

TEST(DensityProfile, InterpolatesKnotsAndStaysPositive) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> step(0.05, 1.0), val(0.01, 5.0), probe(-3.0, 30.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> knots{0.0}, values{val(rng)};
    for (int i = 0; i < 12; ++i) {
      knots.push_back(knots.back() + step(rng));
      values.push_back(val(rng));
    }
    const DensityProfile eta = DensityProfile::from_knots(knots, values);
    for (size_t i = 0; i < knots.size(); ++i) EXPECT_NEAR(eta(knots[i]), values[i], 1e-14);
    const double lo = *std::min_element(values.begin(), values.end());
    const double hi = *std::max_element(values.begin(), values.end());
    for (int k = 0; k < 200; ++k) {
      const double y = probe(rng), v = eta(y);
      EXPECT_GT(v, 0.0);
      EXPECT_GE(v, lo - 1e-12);  // shape preservation: no overshoot between knots
      EXPECT_LE(v, hi + 1e-12);
    }
  }
}

TEST(DensityProfile, DerivativeIsContinuousAndMatchesDifferences) {
  const DensityProfile eta = DensityProfile::from_knots({0, 0.3, 1.0, 1.2, 2.0}, {1, 1.5, 1.4, 2.0, 2.5});
  for (double y : {0.1, 0.5, 1.1, 1.7}) {
    const double h = 1e-6;
    EXPECT_NEAR(eta.derivative(y), (eta(y + h) - eta(y - h)) / (2 * h), 1e-7);
  }
  for (double k : {0.3, 1.0, 1.2}) EXPECT_NEAR(eta.derivative(k - 1e-12), eta.derivative(k + 1e-12), 1e-8);
  EXPECT_EQ(eta.derivative(-1.0), 0.0);
  EXPECT_EQ(eta(5.0), 2.5);
  // Complex-step derivative agrees.
  EXPECT_NEAR(eta.eval(std::complex<double>(0.5, 1e-30)).imag() / 1e-30, eta.derivative(0.5), 1e-13);
}

TEST(DensityProfile, ConstantAndInvalidInput) {
  EXPECT_TRUE(build_eta({0.0, 0.5, 0.2}, {2.0, 2.0, 2.0}).is_constant());
  EXPECT_EQ(build_eta({0.0, 0.5}, {2.0, 2.0})(7.0), 2.0);
  EXPECT_THROW(DensityProfile::from_knots({0, 0}, {1, 1}), InputError);
  EXPECT_THROW(DensityProfile::from_knots({0, 1}, {1, -1}), InputError);
}

TEST(Stream, ExactForQuadraticStreamFunctions) {
  const SpaceSet s = build_spaces(fixtures::square(2));
  const StreamOperator op(s);
  auto psi = [](const Vec2& x) { return 0.3 + x.y() - 0.4 * x.y() * x.y() + 0.7 * x.x() * x.y() - x.x() * x.x(); };
  // u = (psi_y, -psi_x)
  const Vector u = interpolate_vector(s, [](const Vec2& x) {
    return Vec2(1 - 0.8 * x.y() + 0.7 * x.x(), -(0.7 * x.y() - 2 * x.x()));
  });
  const Vector exact = interpolate_scalar(s, psi);
  const Vector got = solve_stream(op, u, exact);
  EXPECT_LT((got - exact).lpNorm<Eigen::Infinity>(), 1e-9);
  // The boundary line integral reproduces psi up to a constant (and a sign fixed by the orientation).
  const Vector n = op.apply(u);
  const Vector d1 = n - exact, d2 = n + exact;
  const double spread1 = d1.maxCoeff() - d1.minCoeff(), spread2 = d2.maxCoeff() - d2.minCoeff();
  EXPECT_LT(std::min(spread1, spread2), 1e-9);
}

TEST(Stream, TransposeAndAdjointDuality) {
  const SpaceSet s = build_spaces(fixtures::square(2));
  const StreamOperator op(s);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uni(-1, 1);
  Vector u(2 * s.n_nodes), y(s.n_nodes);
  for (auto& v : u) v = uni(rng);
  for (auto& v : y) v = uni(rng);
  EXPECT_NEAR(y.dot(op.apply(u)), u.dot(op.apply_transpose(y)), 1e-10 * (1 + std::abs(y.dot(op.apply(u)))));
  QuadField q(s.quad.size());
  for (auto& v : q) v = uni(rng);
  const Vector r = apply_stream_adjoint(op, q);
  const QuadField n0 = scalar_at_quad(s, op.apply_homogeneous(u));
  double pairing = 0.0;
  for (size_t k = 0; k < q.size(); ++k) pairing += s.quad[k].w * q[k] * n0[k];
  EXPECT_NEAR(r.dot(u), pairing, 1e-11);
  const Matrix U = Matrix::Random(2 * s.n_nodes, 3);
  const Matrix NU = op.apply_dense(U);
  for (int j = 0; j < 3; ++j) EXPECT_LT((NU.col(j) - op.apply(U.col(j))).norm(), 1e-12);
}

TEST(Stream, FluxImbalanceIsRejected) {
  const SpaceSet s = build_spaces(fixtures::square(1));
  const StreamOperator op(s);
  const Vector u = interpolate_vector(s, [](const Vec2& x) { return Vec2(x.x(), 0.0); });
  EXPECT_NEAR(op.boundary_flux(u), 1.0, 1e-14);
  EXPECT_THROW(op.boundary_values(u, true), InputError);
}

TEST(Density, ProfileFromProblemReproducesRho0) {
  const Problem pb(fixtures::square(2), fixtures::channel_params());
  const SpaceSet& s = pb.spaces();
  const Vector psi = pb.stream().apply(pb.u_gamma0());
  for (int n : s.gamma0_nodes) EXPECT_NEAR(pb.profile()(psi[n]), 1 + 0.5 * s.arclength[n], 1e-12);
  const DensityValues dv = evaluate_density(pb.profile(), s, psi);
  for (double r : dv.rho) EXPECT_GT(r, 0.0);
}
