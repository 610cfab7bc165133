#ifndef MPOC_ADJOINT_HPP
#define MPOC_ADJOINT_HPP

#include "mpoc/objective.hpp"
#include "mpoc/state_residual.hpp"

namespace mpoc {

// Multipliers at a converged state, with the objective multiplier fixed to 1.
struct AdjointSolution {
  Vector lambda;    // velocity adjoint, full length, in the homogeneous space
  Vector pi;        // pressure adjoint
  Vector phi;       // rotation adjoint, zero on Γ
  Vector chi;       // stream-function adjoint
  Vector xi;        // trace functional on Γ \ Γ2: two values per node of SpaceSet::nonslip_nodes
  Vector theta;     // trace functional on Γ: one value per node of SpaceSet::boundary_nodes
  Vector xi_full;     // same functional as a full velocity-length vector (zero off Γ \ Γ2)
  Vector theta_full;  // full scalar-length vector (zero off Γ)
  double lambda0 = 1.0;
  double residual = 0.0;  // relative residual of the adjoint system
};

// Transposed linearization blocks: pairing of the adjoint fields with state perturbations.
struct AdjointBlocks {
  SparseMatrix transport_t;       // (B(u) + first-slot B(u))^T
  SparseMatrix rot_transport_t;   // first-slot rotation transport, transposed
  SparseMatrix density_mom_t;     // d/dpsi of density-weighted momentum terms, transposed
  SparseMatrix density_rot_t;     // same for the rotation equation
  SparseMatrix stream_t;          // d(psi rows)/du, transposed
  StateJacobian jacobian;
};

AdjointBlocks assemble_adjoint_blocks(const Problem& pb, const StateSolution& state);

// Reduced unknowns (velocity in the homogeneous space, unpinned pressure, interior rotation, psi)
// and the matching rows of the state Jacobian.
struct ReducedMaps {
  SparseMatrix col_map;  // full variables <- reduced variables
  SparseMatrix row_map;  // reduced equations <- full residual rows (transposed selection)
};
ReducedMaps reduced_maps(const Problem& pb);

AdjointSolution solve_adjoint(const Problem& pb, const StateSolution& state, const Targets& targets);

}  // namespace mpoc

#endif
