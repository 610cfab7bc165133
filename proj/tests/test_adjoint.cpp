#include "mpoc/adjoint.hpp"
#include "mpoc/optimizer.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace mpoc;
using namespace mpoc::fixtures;

TEST(Adjoint, SystemIsSolvedAccurately) {
  const Problem pb(square(2), channel_params());
  const ControlPair c = project_controls(pb, channel_controls(pb));
  const StateSolution st = solve_state(pb, c, {1e-13, 200, 1.0});
  const AdjointSolution adj = solve_adjoint(pb, st, channel_targets(pb));
  EXPECT_LT(adj.residual, 1e-10);
  EXPECT_EQ(adj.lambda0, 1.0);
  const SpaceSet& s = pb.spaces();
  EXPECT_EQ(adj.xi.size(), 2 * static_cast<Eigen::Index>(s.nonslip_nodes.size()));
  EXPECT_EQ(adj.theta.size(), static_cast<Eigen::Index>(s.boundary_nodes.size()));
  for (int n : s.boundary_nodes) EXPECT_EQ(adj.phi[n], 0.0);
  for (int n : s.interior_nodes) EXPECT_EQ(adj.theta_full[n], 0.0);
}

TEST(Adjoint, ReducedMapsShapes) {
  const Problem pb(square(1), channel_params());
  const ReducedMaps m = reduced_maps(pb);
  const SpaceSet& s = pb.spaces();
  const Eigen::Index full = 2 * s.n_nodes + s.pressure_dim() + 2 * s.n_nodes;
  EXPECT_EQ(m.col_map.rows(), full);
  EXPECT_EQ(m.col_map.cols(), m.row_map.rows());
}

TEST(Adjoint, GradientMatchesFiniteDifferencesOnSmallProblems) {
  for (double slope : {0.0, 0.5}) {
    const Problem pb(square(1), channel_params({1, 1, 0.3, 0.5, slope}));
    const ControlPair c = project_controls(pb, channel_controls(pb));
    for (const auto& r : gradient_check(pb, channel_targets(pb), c, 3, 99)) EXPECT_LT(r.rel_error, 1e-6);
  }
}

TEST(Adjoint, ZeroTargetsMismatchGivesControlCostGradientOnly) {
  // Targets equal to the state and beta1 = 0: only the control cost remains, so xi and theta vanish.
  ChannelOptions o;
  o.beta = {0, 1, 1, 1, 1e-2, 1e-2};
  const Problem pb(square(1), channel_params(o));
  const ControlPair c = project_controls(pb, channel_controls(pb));
  const StateSolution st = solve_state(pb, c, {1e-13, 200, 1.0});
  const AdjointSolution adj = solve_adjoint(pb, st, targets_from_state(pb, st));
  EXPECT_LT(adj.xi.norm() + adj.theta.norm(), 1e-8);
  const ReducedGradient g = reduced_gradient(pb, adj, c);
  EXPECT_LT((g.d1 - 1e-2 * pb.halfnorm(Segment::Gamma1).apply_interleaved(c.g1)).norm(), 1e-8);
}
