#ifndef MPOC_STATE_RESIDUAL_HPP
#define MPOC_STATE_RESIDUAL_HPP

#include "mpoc/problem.hpp"

#include <complex>

namespace mpoc {

template <class T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Full discrete residual of the coupled system, on every row (constrained rows included):
//   mom = mu1 A u + c(u; u, .) - 2 mur (rot w, .) - (rho f, .) + D^T p
//   div = D u
//   rot = mu2 K w + c~(u; w, .) + 4 mur M w - 2 mur (rot u, .) - (rho g, .)
//   psi = K psi - (rot u, .) on interior rows, psi - L u on boundary rows
// with rho = eta(psi) evaluated at quadrature points.
template <class T>
struct ResidualParts {
  VecT<T> mom, div, rot, psi;
};

template <class T>
ResidualParts<T> evaluate_state_residual(const Problem& pb, const VecT<T>& u, const VecT<T>& p, const VecT<T>& w,
                                         const VecT<T>& psi);

extern template ResidualParts<double> evaluate_state_residual<double>(const Problem&, const VecT<double>&,
                                                                      const VecT<double>&, const VecT<double>&,
                                                                      const VecT<double>&);
extern template ResidualParts<std::complex<double>> evaluate_state_residual<std::complex<double>>(
    const Problem&, const VecT<std::complex<double>>&, const VecT<std::complex<double>>&,
    const VecT<std::complex<double>>&, const VecT<std::complex<double>>&);

// Jacobian of the residual above at (u, p, w, psi), by blocks (row block _ column block).
struct StateJacobian {
  SparseMatrix mom_u, mom_p, mom_w, mom_psi;
  SparseMatrix div_u;
  SparseMatrix rot_u, rot_w, rot_psi;
  SparseMatrix psi_u, psi_psi;
  int nu = 0, np = 0, nw = 0, npsi = 0;
  // Assembled square matrix in the variable order (u, p, w, psi).
  SparseMatrix full() const;
};

StateJacobian linearize_state(const Problem& pb, const Vector& u, const Vector& p, const Vector& w,
                              const Vector& psi);

}  // namespace mpoc

#endif
