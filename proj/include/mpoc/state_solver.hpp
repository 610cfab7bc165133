#ifndef MPOC_STATE_SOLVER_HPP
#define MPOC_STATE_SOLVER_HPP

#include "mpoc/problem.hpp"

#include <string>

namespace mpoc {

struct SolverOptions {
  double tol = 1e-9;
  int max_iter = 100;
  double relaxation = 1.0;
};

struct PicardRecord {
  int iteration = 0;
  double update_norm = 0.0;      // H1 norm of T(u_k) - u_k
  double relaxation = 1.0;
  double energy_residual = 0.0;  // relative defect of the momentum equation tested with its own solution
};

struct StateSolution {
  Vector u, p, w, psi;  // full nodal vectors (lifts included)
  QuadField rho, drho;
  std::vector<PicardRecord> history;
  bool converged = false;
  std::string reason;
  double residual = 0.0;        // norm of the free-row residual of the full system
  double theta_bound = 0.0;     // data aggregate Θ
  double solution_norm = 0.0;   // ||u||_H1 + ||w||_H1
  double lift_ratio = 0.0;      // ||lift||_H1 / extension norm of its trace
  bool viscosity_ok = true;     // advisory check
  std::string advisory;
};

// Saddle-point matrix [P^T A P, (E^T D P)^T; E^T D P, 0], E dropping the pinned pressure.
SparseMatrix saddle_matrix(const Problem& pb, const SparseMatrix& A, const SparseMatrix& P);

// Discrete Stokes extension of (u0 on Γ0, g1 on Γ1, 0 elsewhere on Γ). Throws InputError on a
// flux imbalance. `ratio` receives ||lift||_H1 / extension norm of the trace when non-null.
Vector lift_velocity(const Problem& pb, const Vector& g1, double* ratio = nullptr);
// Discrete harmonic extension of (w0 on Γ0, g2 on Γ3).
Vector lift_rotation(const Problem& pb, const Vector& g2);

// Homogeneous microrotation solving the linear rotation equation with transport a and
// rotation source u_total; the full rotation is w_lift + result.
Vector solve_w_linear(const Problem& pb, const QuadField& rho, const Vector& a, const Vector& u_total,
                      const Vector& w_lift);

struct PicardStep {
  Vector u_hat, w_hat, p, psi;
  DensityValues density;
  double energy_residual = 0.0;
};

// One application of the fixed-point map at the homogeneous iterate u_tilde.
PicardStep picard_step(const Problem& pb, const Vector& u_lift, const Vector& w_lift, const Vector& u_tilde);

StateSolution solve_state(const Problem& pb, const ControlPair& controls, const SolverOptions& opts = {});

// Θ = |u_g1| |w_g2| + |u_g1| + |w_g2| + |u_g1|^2 + |f| + |g| (extension norms for traces, L2 for forces).
double theta_bound(const Problem& pb, const ControlPair& controls);

// Free-row residual norm of the full discrete system at the given fields.
double state_residual_norm(const Problem& pb, const Vector& u, const Vector& p, const Vector& w, const Vector& psi);

// Evaluates min{2 mu1 - C_eta C |w_g2| - mur C, mu2 - mur C} with C the Poincaré constant.
double viscosity_margin(const Problem& pb, const ControlPair& controls);

}  // namespace mpoc

#endif
