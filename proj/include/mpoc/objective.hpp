#ifndef MPOC_OBJECTIVE_HPP
#define MPOC_OBJECTIVE_HPP

#include "mpoc/state_solver.hpp"

#include <array>

namespace mpoc {

// Addends: (b1/2)|rot u|^2, (b2/2)|u - u_d|^2, (b3/2)|w - w_d|^2, (b4/2)|eta(psi) - rho_d|^2,
// (b5/2)|g1|_S^2 on Γ1, (b6/2)|g2|_S^2 on Γ3.
struct ObjectiveBreakdown {
  std::array<double, 6> terms{};
  double total = 0.0;
};

ObjectiveBreakdown evaluate_J(const Problem& pb, const Targets& targets, const Vector& u, const Vector& w,
                              const Vector& psi, const Vector& g1, const Vector& g2);
ObjectiveBreakdown evaluate_J(const Problem& pb, const Targets& targets, const StateSolution& state,
                              const ControlPair& controls);

// Partial derivatives of J with respect to the full nodal vectors u, w and psi.
struct StateGradient {
  Vector du, dw, dpsi;
};
StateGradient objective_state_gradient(const Problem& pb, const Targets& targets, const Vector& u, const Vector& w,
                                       const Vector& psi);

// Targets equal to the fields of a state (used for manufactured optima).
Targets targets_from_state(const Problem& pb, const StateSolution& state);

}  // namespace mpoc

#endif
