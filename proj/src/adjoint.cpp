#include "mpoc/adjoint.hpp"

namespace mpoc {

namespace {

void append_block(std::vector<Triplet>& trip, const SparseMatrix& A, int r0, int c0) {
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) trip.emplace_back(r0 + r, c0 + it.col(), it.value());
}

}  // namespace

AdjointBlocks assemble_adjoint_blocks(const Problem& pb, const StateSolution& state) {
  const SpaceSet& s = pb.spaces();
  AdjointBlocks b;
  b.jacobian = linearize_state(pb, state.u, state.p, state.w, state.psi);
  b.transport_t = SparseMatrix((assemble_B(s, state.rho, state.u) + assemble_B_first_slot(s, state.rho, state.u))
                                   .transpose());
  b.rot_transport_t = SparseMatrix(assemble_Btilde_first_slot(s, state.rho, state.w).transpose());
  b.density_mom_t = SparseMatrix(b.jacobian.mom_psi.transpose());
  b.density_rot_t = SparseMatrix(b.jacobian.rot_psi.transpose());
  b.stream_t = SparseMatrix(b.jacobian.psi_u.transpose());
  return b;
}

ReducedMaps reduced_maps(const Problem& pb) {
  const SpaceSet& s = pb.spaces();
  const int N = s.n_nodes, Np = s.pressure_dim();
  const int m = static_cast<int>(s.P.cols());
  const int nI = static_cast<int>(s.interior_nodes.size());
  std::vector<Triplet> trip;
  append_block(trip, s.P, 0, 0);
  int col = m;
  for (int i = 0; i < Np; ++i)
    if (i != s.pinned_pressure) trip.emplace_back(2 * N + i, col++, 1.0);
  for (int k = 0; k < nI; ++k) trip.emplace_back(2 * N + Np + s.interior_nodes[k], col++, 1.0);
  for (int n = 0; n < N; ++n) trip.emplace_back(2 * N + Np + N + n, col++, 1.0);
  ReducedMaps maps;
  maps.col_map = make_sparse(2 * N + Np + 2 * N, col, trip);
  maps.row_map = maps.col_map.transpose();
  return maps;
}

AdjointSolution solve_adjoint(const Problem& pb, const StateSolution& state, const Targets& targets) {
  const SpaceSet& s = pb.spaces();
  const int N = s.n_nodes, Np = s.pressure_dim();
  StateJacobian J = linearize_state(pb, state.u, state.p, state.w, state.psi);
  SparseMatrix Jf = J.full();
  ReducedMaps maps = reduced_maps(pb);
  const SparseMatrix& C = maps.col_map;
  SparseMatrix JxT = SparseMatrix((maps.row_map * Jf * C).transpose());

  StateGradient g = objective_state_gradient(pb, targets, state.u, state.w, state.psi);
  Vector gfull = Vector::Zero(Jf.rows());
  gfull.segment(0, 2 * N) = g.du;
  gfull.segment(2 * N + Np, N) = g.dw;
  gfull.segment(2 * N + Np + N, N) = g.dpsi;
  Vector gx = C.transpose() * gfull;

  AdjointSolution a;
  Vector L;
  try {
    Factorization f(JxT, false);
    L = f.solve(Vector(-gx));
  } catch (const NumericalError&) {
    throw NumericalError("adjoint system singular: viscosity condition likely violated");
  }
  if (!L.allFinite()) throw NumericalError("adjoint system singular: viscosity condition likely violated");
  const double gn = gx.norm();
  a.residual = gn > 0.0 ? (JxT * L + gx).norm() / gn : (JxT * L).norm();

  Vector Lfull = C * L;
  a.lambda = Lfull.segment(0, 2 * N);
  a.pi = Lfull.segment(2 * N, Np);
  a.phi = Lfull.segment(2 * N + Np, N);
  a.chi = Lfull.segment(2 * N + Np + N, N);

  Vector r = gfull + Jf.transpose() * Lfull;
  a.xi_full = Vector::Zero(2 * N);
  a.theta_full = Vector::Zero(N);
  a.xi.resize(2 * s.nonslip_nodes.size());
  for (size_t k = 0; k < s.nonslip_nodes.size(); ++k) {
    const int n = s.nonslip_nodes[k];
    a.xi[2 * k] = -r[n];
    a.xi[2 * k + 1] = -r[N + n];
    a.xi_full[n] = a.xi[2 * k];
    a.xi_full[N + n] = a.xi[2 * k + 1];
  }
  a.theta.resize(s.boundary_nodes.size());
  for (size_t k = 0; k < s.boundary_nodes.size(); ++k) {
    const int n = s.boundary_nodes[k];
    a.theta[k] = -r[2 * N + Np + n];
    a.theta_full[n] = a.theta[k];
  }
  return a;
}

}  // namespace mpoc
