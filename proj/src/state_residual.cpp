#include "mpoc/state_residual.hpp"

namespace mpoc {

namespace {

template <class T>
VecT<T> spmv(const SparseMatrix& A, const VecT<T>& x) {
  if constexpr (std::is_same_v<T, double>) {
    return A * x;
  } else {
    Vector re = A * x.real();
    Vector im = A * x.imag();
    VecT<T> out(re.size());
    for (Eigen::Index k = 0; k < re.size(); ++k) out[k] = T(re[k], im[k]);
    return out;
  }
}

// Keeps rows where keep[row] is set.
SparseMatrix select_rows(const SparseMatrix& A, const std::vector<char>& keep) {
  std::vector<Triplet> trip;
  for (int r = 0; r < A.outerSize(); ++r) {
    if (!keep[r]) continue;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) trip.emplace_back(r, it.col(), it.value());
  }
  return make_sparse(static_cast<int>(A.rows()), static_cast<int>(A.cols()), trip);
}

void append_block(std::vector<Triplet>& trip, const SparseMatrix& A, int r0, int c0) {
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) trip.emplace_back(r0 + r, c0 + it.col(), it.value());
}

}  // namespace

template <class T>
ResidualParts<T> evaluate_state_residual(const Problem& pb, const VecT<T>& u, const VecT<T>& p, const VecT<T>& w,
                                         const VecT<T>& psi) {
  const SpaceSet& s = pb.spaces();
  const ModelParams& mp = pb.params();
  const DensityProfile& eta = pb.profile();
  const int N = s.n_nodes;
  ResidualParts<T> r;
  r.mom = mp.mu1 * spmv<T>(pb.A(), u) - (2.0 * mp.mur) * spmv<T>(pb.rot_w(), w) +
          spmv<T>(SparseMatrix(pb.divergence().transpose()), p);
  r.div = spmv<T>(pb.divergence(), u);
  r.rot = mp.mu2 * spmv<T>(pb.stiffness(), w) + (4.0 * mp.mur) * spmv<T>(pb.mass(), w) -
          (2.0 * mp.mur) * spmv<T>(pb.rot_u(), u);

  for (int t = 0; t < s.cells(); ++t) {
    const auto& cn = s.cell_nodes[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const int k = t * kQuadPoints + q;
      const QuadPoint& qp = s.quad[k];
      T ux(0.0), uy(0.0), wv(0.0), pv(0.0);
      T uxx(0.0), uxy(0.0), uyx(0.0), uyy(0.0), wx(0.0), wy(0.0);
      for (int a = 0; a < 6; ++a) {
        const int n = cn[a];
        ux += qp.phi[a] * u[n];
        uy += qp.phi[a] * u[N + n];
        wv += qp.phi[a] * w[n];
        pv += qp.phi[a] * psi[n];
        uxx += qp.grad[a].x() * u[n];
        uxy += qp.grad[a].y() * u[n];
        uyx += qp.grad[a].x() * u[N + n];
        uyy += qp.grad[a].y() * u[N + n];
        wx += qp.grad[a].x() * w[n];
        wy += qp.grad[a].y() * w[n];
      }
      const T rho = eta.eval(pv);
      const T convx = ux * uxx + uy * uxy;
      const T convy = ux * uyx + uy * uyy;
      const T convw = ux * wx + uy * wy;
      const T rw = rho * qp.w;
      for (int i = 0; i < 6; ++i) {
        const T adv = ux * qp.grad[i].x() + uy * qp.grad[i].y();
        r.mom[cn[i]] += rw * (0.5 * (convx * qp.phi[i] - adv * ux) - pb.fx()[k] * qp.phi[i]);
        r.mom[N + cn[i]] += rw * (0.5 * (convy * qp.phi[i] - adv * uy) - pb.fy()[k] * qp.phi[i]);
        r.rot[cn[i]] += rw * (0.5 * (convw * qp.phi[i] - adv * wv) - pb.g()[k] * qp.phi[i]);
      }
    }
  }

  VecT<T> kpsi = spmv<T>(pb.stiffness(), psi) - spmv<T>(pb.rot_u(), u);
  VecT<T> lu = spmv<T>(pb.stream().boundary_operator(), u);
  r.psi.resize(N);
  for (int n = 0; n < N; ++n) r.psi[n] = s.on_boundary[n] ? T(psi[n] - lu[n]) : kpsi[n];
  return r;
}

template ResidualParts<double> evaluate_state_residual<double>(const Problem&, const VecT<double>&,
                                                               const VecT<double>&, const VecT<double>&,
                                                               const VecT<double>&);
template ResidualParts<std::complex<double>> evaluate_state_residual<std::complex<double>>(
    const Problem&, const VecT<std::complex<double>>&, const VecT<std::complex<double>>&,
    const VecT<std::complex<double>>&, const VecT<std::complex<double>>&);

SparseMatrix StateJacobian::full() const {
  std::vector<Triplet> trip;
  const int cu = 0, cp = nu, cw = nu + np, cs = nu + np + nw;
  append_block(trip, mom_u, cu, cu);
  append_block(trip, mom_p, cu, cp);
  append_block(trip, mom_w, cu, cw);
  append_block(trip, mom_psi, cu, cs);
  append_block(trip, div_u, cp, cu);
  append_block(trip, rot_u, cw, cu);
  append_block(trip, rot_w, cw, cw);
  append_block(trip, rot_psi, cw, cs);
  append_block(trip, psi_u, cs, cu);
  append_block(trip, psi_psi, cs, cs);
  const int n = nu + np + nw + npsi;
  return make_sparse(n, n, trip);
}

StateJacobian linearize_state(const Problem& pb, const Vector& u, const Vector& p, const Vector& w,
                              const Vector& psi) {
  (void)p;
  const SpaceSet& s = pb.spaces();
  const ModelParams& mp = pb.params();
  const int N = s.n_nodes;
  DensityValues dv = evaluate_density(pb.profile(), s, psi);
  StateJacobian J;
  J.nu = 2 * N;
  J.np = s.pressure_dim();
  J.nw = N;
  J.npsi = N;
  J.mom_u = mp.mu1 * pb.A() + assemble_B(s, dv.rho, u) + assemble_B_first_slot(s, dv.rho, u);
  J.mom_p = pb.divergence().transpose();
  J.mom_w = (-2.0 * mp.mur) * pb.rot_w();
  J.mom_psi = assemble_momentum_density_sensitivity(s, dv.drho, u, pb.fx(), pb.fy());
  J.div_u = pb.divergence();
  J.rot_u = assemble_Btilde_first_slot(s, dv.rho, w) - (2.0 * mp.mur) * pb.rot_u();
  J.rot_w = mp.mu2 * pb.stiffness() + assemble_Btilde(s, dv.rho, u) + (4.0 * mp.mur) * pb.mass();
  J.rot_psi = assemble_rotation_density_sensitivity(s, dv.drho, u, w, pb.g());

  std::vector<char> interior(N), boundary(N);
  for (int n = 0; n < N; ++n) {
    boundary[n] = s.on_boundary[n];
    interior[n] = !s.on_boundary[n];
  }
  J.psi_u = SparseMatrix(-select_rows(pb.rot_u(), interior) - select_rows(pb.stream().boundary_operator(), boundary));
  std::vector<Triplet> id;
  for (int n : s.boundary_nodes) id.emplace_back(n, n, 1.0);
  J.psi_psi = select_rows(pb.stiffness(), interior) + make_sparse(N, N, id);
  return J;
}

}  // namespace mpoc
