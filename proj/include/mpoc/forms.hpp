#ifndef MPOC_FORMS_HPP
#define MPOC_FORMS_HPP

#include "mpoc/fe_space.hpp"

namespace mpoc {

// Number of threads used for cell-wise assembly. Element contributions are concatenated in
// cell order, so results do not depend on the thread count.
void set_assembly_threads(int n);
int assembly_threads();

// <A u, v> = 2 (D(u), D(v)) + 2 alpha \int_{Γ2} u.v ; velocity x velocity.
SparseMatrix assemble_A(const SpaceSet& s, double alpha);
// Boundary mass on Γ2 edges (both components); <M u, v> = \int_{Γ2} u.v.
SparseMatrix assemble_slip_mass(const SpaceSet& s);
// <Ã w, z> = (∇w, ∇z).
SparseMatrix assemble_Atilde(const SpaceSet& s);
SparseMatrix assemble_mass(const SpaceSet& s);
SparseMatrix assemble_vector_mass(const SpaceSet& s);
// H1 Gram matrices (stiffness + mass).
SparseMatrix assemble_gram(const SpaceSet& s);
SparseMatrix assemble_vector_gram(const SpaceSet& s);

// Unskewed scalar convection: z^T C w = (rho a.∇w, z).
SparseMatrix assemble_convection(const SpaceSet& s, const QuadField& rho, const Vector& a);
// Skew transport: v^T B e = c(a; e, v) = 1/2[(rho a.∇e, v) - (rho a.∇v, e)] (vector fields).
SparseMatrix assemble_B(const SpaceSet& s, const QuadField& rho, const Vector& a);
// Scalar skew transport: z^T B w = 1/2[(rho a.∇w, z) - (rho a.∇z, w)].
SparseMatrix assemble_Btilde(const SpaceSet& s, const QuadField& rho, const Vector& a);
// Transport velocity as the unknown: v^T M a = c(a; e, v) for a fixed transported field e.
SparseMatrix assemble_B_first_slot(const SpaceSet& s, const QuadField& rho, const Vector& e);
// z^T M a = c~(a; w, z) for a fixed scalar w; rows scalar, columns velocity.
SparseMatrix assemble_Btilde_first_slot(const SpaceSet& s, const QuadField& rho, const Vector& w);

// v^T R w = (rot w, v); velocity rows, scalar columns.
SparseMatrix assemble_rot_coupling(const SpaceSet& s);
// z^T R u = (rot u, z); scalar rows, velocity columns.
SparseMatrix assemble_rot_coupling_u(const SpaceSet& s);
// (rot u, rot v).
SparseMatrix assemble_rotrot(const SpaceSet& s);
// q^T D u = -(q, div u); pressure rows, velocity columns.
SparseMatrix assemble_divergence(const SpaceSet& s);

// (rho f, v) with optional density weights (nullptr means rho = 1).
Vector assemble_load(const SpaceSet& s, const QuadField* rho, const QuadField& fx, const QuadField& fy);
Vector assemble_scalar_load(const SpaceSet& s, const QuadField* rho, const QuadField& g);

// Derivatives of the density-weighted terms with respect to the stream-function coefficients:
// d/dpsi [c_rho(u; u, v) - (rho f, v)] and d/dpsi [c~_rho(u; w, z) - (rho g, z)], where rho = eta(psi)
// and drho = eta'(psi) at quadrature points.
SparseMatrix assemble_momentum_density_sensitivity(const SpaceSet& s, const QuadField& drho, const Vector& u,
                                                   const QuadField& fx, const QuadField& fy);
SparseMatrix assemble_rotation_density_sensitivity(const SpaceSet& s, const QuadField& drho, const Vector& u,
                                                   const Vector& w, const QuadField& g);

// Throws NumericalError naming the first quadrature point with rho <= 0.
void check_positive_density(const SpaceSet& s, const QuadField& rho);

// Integral of a quadrature field, and L2 norms of finite-element fields.
double integrate(const SpaceSet& s, const QuadField& f);
double h1_norm(const SpaceSet& s, const SparseMatrix& gram, const Vector& v);

}  // namespace mpoc

#endif
