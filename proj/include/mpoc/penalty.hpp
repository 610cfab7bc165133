#ifndef MPOC_PENALTY_HPP
#define MPOC_PENALTY_HPP

#include "mpoc/objective.hpp"
#include "mpoc/state_residual.hpp"

namespace mpoc {

// A point (u, w, g1, g2) that need not satisfy the state equations. u is a full velocity
// vector (discretely divergence-free with u.n = 0 on Γ2), w a full scalar vector.
struct PenaltyPoint {
  Vector u, w, g1, g2;
};

// Riesz solves for the dual norms of the momentum residual (homogeneous divergence-free space,
// A metric) and of the rotation residual (H1_0, stiffness metric).
class RieszOperators {
 public:
  explicit RieszOperators(const Problem& pb);
  // P y with y the Riesz representative of r restricted to the homogeneous divergence-free space.
  Vector velocity(const Vector& r) const;
  Matrix velocity(const Matrix& R) const;
  // Q z with K_II z = r_I.
  Vector rotation(const Vector& r) const;
  Matrix rotation(const Matrix& R) const;

 private:
  const Problem* pb_;
  Factorization saddle_;
  int m_ = 0, np_ = 0;
};

struct PenaltyMultipliers {
  Vector lambda;      // (1/eps) A^-1 momentum residual
  Vector phi;         // (1/eps) K^-1 rotation residual
  Vector xi;          // (1/eps) trace mismatch of u on Γ \ Γ2 (full velocity length)
  Vector theta;       // (1/eps) trace mismatch of w on Γ (full scalar length)
  // Squared norms of the four constraint defects (independent of eps).
  double momentum2 = 0.0, rotation2 = 0.0, trace_u2 = 0.0, trace_w2 = 0.0;
  double defect() const { return std::sqrt(momentum2 + rotation2 + trace_u2 + trace_w2); }
};

PenaltyMultipliers compute_penalty_multipliers(const Problem& pb, const RieszOperators& riesz, const PenaltyPoint& x,
                                               double eps);

struct PenaltyValue {
  ObjectiveBreakdown J;
  double anchor_terms = 0.0;  // 1/2 of the squared distances to the anchor
  double penalty = 0.0;       // (1/2 eps) times the four squared defects
  double total = 0.0;
};

PenaltyValue evaluate_J_eps(const Problem& pb, const RieszOperators& riesz, const Targets& targets,
                            const PenaltyPoint& x, const PenaltyPoint& anchor, double eps);

struct PenaltyGradient {
  Vector du, dw, dg1, dg2;
};

// Derivative of J_eps assembled from the multipliers.
PenaltyGradient penalty_gradient(const Problem& pb, const RieszOperators& riesz, const Targets& targets,
                                 const PenaltyPoint& x, const PenaltyPoint& anchor, double eps);

// Trace mismatches: u - (u0, g1, 0) on Γ \ Γ2 nodes and w - (w0, g2) on Γ nodes (full length, zero elsewhere).
Vector velocity_trace_mismatch(const Problem& pb, const Vector& u, const Vector& g1);
Vector rotation_trace_mismatch(const Problem& pb, const Vector& w, const Vector& g2);

}  // namespace mpoc

#endif
