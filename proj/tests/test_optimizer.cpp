#include "mpoc/optimizer.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mpoc;
using namespace mpoc::fixtures;

TEST(Projection, ProducesFeasibleIdempotentControls) {
  const Problem pb(square(2), channel_params());
  ControlPair raw = channel_controls(pb, 3.0, 1.0);  // out of the box and off the flux
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  for (auto& v : raw.g1) v += nd(rng);
  for (auto& v : raw.g2) v += nd(rng);
  const ControlPair p = project_controls(pb, raw);
  EXPECT_TRUE(controls_feasible(pb, p));
  EXPECT_NEAR(pb.flux_functional().dot(p.g1), p.flux_target, 1e-12);
  const ControlPair q = project_controls(pb, p);
  EXPECT_LT((q.g1 - p.g1).norm() + (q.g2 - p.g2).norm(), 1e-12);
}

TEST(Projection, MinimizesLumpedDistance) {
  const Problem pb(square(2), channel_params());
  const ControlPair raw = channel_controls(pb, 1.7, 0.8);
  const ControlPair p = project_controls(pb, raw);
  const Vector& m = pb.lumped_mass1();
  auto dist = [&](const Vector& g) { return (g - raw.g1).dot(m.asDiagonal() * (g - raw.g1)); };
  std::mt19937_64 rng(32);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 200; ++k) {
    ControlPair trial = p;
    for (auto& v : trial.g1) v += 0.05 * nd(rng);
    trial = project_controls(pb, trial);
    EXPECT_GE(dist(trial.g1), dist(p.g1) - 1e-12);
  }
}

TEST(Projection, UnreachableFluxIsAnInputError) {
  const Problem pb(square(1), channel_params());
  const ControlPair tight = channel_controls(pb, 1.0, 1e-3);
  EXPECT_THROW(project_controls(pb, tight), InputError);
}

TEST(Projection, SMetricProjectionFixesFeasiblePoints) {
  const Problem pb(square(1), channel_params());
  const ControlPair c = project_controls(pb, channel_controls(pb));
  EXPECT_LT((project_s_metric_g1(pb, c, c.g1) - c.g1).norm(), 1e-9);
  EXPECT_LT((project_s_metric_g2(pb, c, c.g2) - c.g2).norm(), 1e-9);
}

TEST(Optimizer, RequiresPositiveControlCosts) {
  ChannelOptions o;
  o.beta = {1, 1, 1, 1, 0, 1e-2};
  const Problem pb(square(1), channel_params(o));
  EXPECT_THROW(optimize(pb, channel_targets(pb), channel_controls(pb)), InputError);
}

TEST(Optimizer, DecreasesObjectiveMonotonically) {
  const Problem pb(square(1), channel_params());
  OptimizerOptions oo;
  oo.max_outer = 30;
  const OptimizationResult r = optimize(pb, channel_targets(pb), channel_controls(pb), oo);
  ASSERT_GE(r.history.size(), 2u);
  for (size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k].J.total, r.history[k - 1].J.total);
  EXPECT_LT(r.history.back().pg_norm, r.history.front().pg_norm);
  EXPECT_TRUE(controls_feasible(pb, r.controls));
}

TEST(Optimizer, DeterministicForFixedSeed) {
  const Problem pb(square(1), channel_params());
  OptimizerOptions oo;
  oo.max_outer = 5;
  const OptimizationResult a = optimize(pb, channel_targets(pb), channel_controls(pb), oo);
  const OptimizationResult b = optimize(pb, channel_targets(pb), channel_controls(pb), oo);
  EXPECT_EQ(a.controls.g1, b.controls.g1);
  EXPECT_EQ(a.certificate.vi_min1, b.certificate.vi_min1);
}

TEST(Optimizer, InverseCrimeReachesCertifiedOptimum) {
  ChannelOptions o;
  o.beta = {0, 1, 1, 1, 1e-4, 1e-4};
  const Problem pb(square(1), channel_params(o));
  const ControlPair truth = project_controls(pb, channel_controls(pb, 1.0, 2.0));
  const StateSolution st = solve_state(pb, truth, {1e-13, 200, 1.0});
  const Targets t = targets_from_state(pb, st);
  ControlPair init = truth;
  init.g2.setZero();
  OptimizerOptions oo;
  oo.tol_vi = 1e-9;
  oo.state = {1e-13, 200, 1.0};
  const OptimizationResult r = optimize(pb, t, init, oo);
  EXPECT_TRUE(r.converged) << r.reason;
  EXPECT_GE(std::min(r.certificate.vi_min1, r.certificate.vi_min2), -1e-6);
  EXPECT_LT(r.history.back().J.total, 1e-3);
}
