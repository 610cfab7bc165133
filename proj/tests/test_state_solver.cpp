#include "mpoc/state_residual.hpp"
#include "mpoc/state_solver.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <complex>
#include <random>

using namespace mpoc;
using namespace mpoc::fixtures;

TEST(StateSolver, ZeroDataGivesZeroStateInOneIteration) {
  ModelParams mp;
  mp.u0 = [](const Vec2&, double) { return Vec2(0, 0); };
  mp.w0 = [](const Vec2&, double) { return 0.0; };
  mp.rho0 = [](const Vec2&, double) { return 1.0; };
  const Problem pb(square(1), mp);
  const StateSolution st = solve_state(pb, pb.zero_controls());
  EXPECT_TRUE(st.converged);
  EXPECT_EQ(st.history.size(), 1u);
  EXPECT_EQ(st.u.norm() + st.w.norm() + st.p.norm(), 0.0);
}

TEST(StateSolver, LiftIsDivergenceFreeWithPrescribedTraces) {
  const Problem pb(square(2), channel_params());
  const ControlPair c = project_controls(pb, channel_controls(pb));
  double ratio = 0.0;
  const Vector lift = lift_velocity(pb, c.g1, &ratio);
  EXPECT_LT((pb.divergence() * lift).norm(), 1e-10);
  const Vector data = pb.velocity_dirichlet(c.g1);
  const SpaceSet& s = pb.spaces();
  for (int n : s.nonslip_nodes) {
    EXPECT_NEAR(lift[n], data[n], 1e-13);
    EXPECT_NEAR(lift[s.n_nodes + n], data[s.n_nodes + n], 1e-13);
  }
  EXPECT_GE(ratio, 1.0 - 1e-12);  // the extension norm is a minimum over extensions
  const Vector wl = lift_rotation(pb, c.g2);
  const Vector wd = pb.rotation_dirichlet(c.g2);
  for (int n : s.boundary_nodes) EXPECT_NEAR(wl[n], wd[n], 1e-13);
}

TEST(StateSolver, FluxImbalanceNamesTheCondition) {
  const Problem pb(square(1), channel_params());
  try {
    lift_velocity(pb, pb.zero_controls().g1);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("boundary flux imbalance"), std::string::npos);
  }
}

TEST(StateSolver, ConvergedStateSatisfiesDiscreteEquations) {
  for (double alpha : {0.0, 1.0}) {
    const Problem pb(square(2), channel_params({1, 1, 0.3, alpha, 0.5}));
    const ControlPair c = project_controls(pb, channel_controls(pb));
    const StateSolution st = solve_state(pb, c, {1e-12, 100, 1.0});
    ASSERT_TRUE(st.converged) << st.reason;
    EXPECT_LT(st.residual, 1e-9);
    EXPECT_LT(state_residual_norm(pb, st.u, st.p, st.w, st.psi), 1e-9);
    EXPECT_LT((pb.divergence() * st.u).norm(), 1e-10);
    EXPECT_LT((st.psi - pb.stream().apply(st.u)).norm(), 1e-12);
    for (double r : st.rho) EXPECT_GT(r, 0.0);
    EXPECT_GT(st.theta_bound, 0.0);
  }
}

TEST(StateSolver, Deterministic) {
  const Problem pb(square(2), channel_params());
  const ControlPair c = project_controls(pb, channel_controls(pb));
  const StateSolution a = solve_state(pb, c), b = solve_state(pb, c);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.history.size(), b.history.size());
}

TEST(StateSolver, ViscosityMarginGrowsWithViscosity) {
  const Problem lo(square(1), channel_params({0.01, 0.01, 0.3, 0.0, 0.5}));
  const Problem hi(square(1), channel_params({10, 10, 0.3, 0.0, 0.5}));
  const double mlo = viscosity_margin(lo, project_controls(lo, channel_controls(lo)));
  const double mhi = viscosity_margin(hi, project_controls(hi, channel_controls(hi)));
  EXPECT_LT(mlo, mhi);
  EXPECT_GT(mhi, 0.0);
}

TEST(StateSolver, SmallViscosityEndsWithRecordNotNaN) {
  const Problem pb(square(2), channel_params({1e-3, 1e-3, 0.3, 0.0, 0.5, 20.0}));
  const ControlPair c = project_controls(pb, channel_controls(pb, 20.0, 100.0));
  const StateSolution st = solve_state(pb, c, {1e-10, 30, 1.0});
  if (!st.converged) EXPECT_FALSE(st.reason.empty());
  for (const auto& r : st.history) EXPECT_TRUE(std::isfinite(r.update_norm));
}

TEST(StateResidual, JacobianMatchesComplexStep) {
  const Problem pb(square(1), channel_params({1, 1, 0.3, 0.5, 0.5}));
  const ControlPair c = project_controls(pb, channel_controls(pb));
  const StateSolution st = solve_state(pb, c);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  auto rnd = [&](Eigen::Index n) {
    Vector v(n);
    for (auto& x : v) x = nd(rng);
    return v;
  };
  const Vector du = rnd(st.u.size()), dp = rnd(st.p.size()), dw = rnd(st.w.size()), dpsi = rnd(st.psi.size());
  constexpr double h = 1e-30;
  using C = std::complex<double>;
  auto lift = [&](const Vector& x, const Vector& d) { return VecT<C>(x.cast<C>() + C(0, h) * d.cast<C>()); };
  const ResidualParts<C> r = evaluate_state_residual<C>(pb, lift(st.u, du), lift(st.p, dp), lift(st.w, dw),
                                                        lift(st.psi, dpsi));
  const StateJacobian J = linearize_state(pb, st.u, st.p, st.w, st.psi);
  auto check = [h](const VecT<C>& cs, const Vector& lin, const char* what) {
    const Vector im = cs.imag() / h;
    EXPECT_LT((im - lin).norm(), 1e-10 * (1 + lin.norm())) << what;
  };
  check(r.mom, J.mom_u * du + J.mom_p * dp + J.mom_w * dw + J.mom_psi * dpsi, "momentum");
  check(r.div, J.div_u * du, "divergence");
  check(r.rot, J.rot_u * du + J.rot_w * dw + J.rot_psi * dpsi, "rotation");
  check(r.psi, J.psi_u * du + J.psi_psi * dpsi, "stream");
}
