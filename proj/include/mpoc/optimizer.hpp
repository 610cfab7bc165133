#ifndef MPOC_OPTIMIZER_HPP
#define MPOC_OPTIMIZER_HPP

#include "mpoc/adjoint.hpp"

#include <cstdint>
#include <string>

namespace mpoc {

struct ReducedGradient {
  Vector d1, d2;      // derivatives of j with respect to the g1, g2 coefficients
  Vector rep1, rep2;  // S-metric representatives: beta5 g1 - S^-1 xi, beta6 g2 - S^-1 theta
};

ReducedGradient reduced_gradient(const Problem& pb, const AdjointSolution& adj, const ControlPair& controls);

// Lumped-metric projection onto the box and the Γ1 flux hyperplane (g2: box only).
// Throws InputError "control set empty for required flux" when the flux is unreachable.
ControlPair project_controls(const Problem& pb, const ControlPair& raw);
bool controls_feasible(const Problem& pb, const ControlPair& c, double tol = 1e-10);

// Exact S-metric projections used by the certificate (dimension at most 200, else NaN).
Vector project_s_metric_g1(const Problem& pb, const ControlPair& c, const Vector& z);
Vector project_s_metric_g2(const Problem& pb, const ControlPair& c, const Vector& z);

struct ReducedEvaluation {
  bool ok = false;
  StateSolution state;
  ObjectiveBreakdown J;
};
ReducedEvaluation evaluate_reduced(const Problem& pb, const Targets& targets, const ControlPair& controls,
                                   const SolverOptions& sopts);

struct OptimizerOptions {
  double step0 = 1.0;
  double shrink = 0.5;
  int max_outer = 200;
  double tol_vi = 1e-6;
  double armijo = 1e-4;
  int competitors = 50;
  std::uint64_t seed = 42;
  SolverOptions state;
};

struct Certificate {
  double vi_min1 = 0.0, vi_min2 = 0.0;              // min over competitors of d^T (g_c - g)
  double projection_dist1 = 0.0, projection_dist2 = 0.0;  // |g - Proj_S(S^-1 multiplier / beta)|_S
};

struct IterationRecord {
  int iteration = 0;
  ObjectiveBreakdown J;
  double pg_norm = 0.0;
  double vi_residual = 0.0;
  double projection_distance = 0.0;
  double step = 0.0;
};

struct OptimizationResult {
  ControlPair controls;
  StateSolution state;
  AdjointSolution adjoint;
  std::vector<IterationRecord> history;
  Certificate certificate;
  std::string reason;
  bool converged = false;
};

Certificate optimality_certificate(const Problem& pb, const ControlPair& controls, const AdjointSolution& adj,
                                   const ReducedGradient& grad, int competitors, std::uint64_t seed);

// Projected gradient norm in the lumped metric.
double projected_gradient_norm(const Problem& pb, const ControlPair& controls, const ReducedGradient& grad);

OptimizationResult optimize(const Problem& pb, const Targets& targets, const ControlPair& init,
                            const OptimizerOptions& opts = {});

struct GradientCheckRow {
  double adjoint = 0.0;
  double finite_difference = 0.0;
  double rel_error = 0.0;
};

// Central differences with one Richardson step along random flux-preserving directions.
std::vector<GradientCheckRow> gradient_check(const Problem& pb, const Targets& targets, const ControlPair& controls,
                                             int directions, std::uint64_t seed, double h = 1e-3,
                                             const SolverOptions& sopts = {1e-13, 200, 1.0});

}  // namespace mpoc

#endif
