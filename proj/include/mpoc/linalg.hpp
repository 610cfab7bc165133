#ifndef MPOC_LINALG_HPP
#define MPOC_LINALG_HPP

#include "mpoc/common.hpp"

#include <memory>
#include <span>

namespace mpoc {

SparseMatrix make_sparse(int rows, int cols, const std::vector<Triplet>& triplets);
double symmetry_defect(const SparseMatrix& A);  // max |A - A^T| / max |A|

// Direct factorization: LDL^T for matrices flagged symmetric, LU with partial pivoting otherwise.
// Both use a fill-reducing (approximate minimum degree) ordering.
class Factorization {
 public:
  Factorization();
  Factorization(const SparseMatrix& A, bool symmetric);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& B) const;
  int rows() const { return n_; }
  bool symmetric() const { return symmetric_; }
  bool valid() const { return static_cast<bool>(impl_); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
  bool symmetric_ = false;
};

Factorization factorize(const SparseMatrix& A, bool symmetric);

SparseMatrix submatrix(const SparseMatrix& A, std::span<const int> rows, std::span<const int> cols);

// S = A_GG - A_GI A_II^{-1} A_IG where G = interface and I = eliminated.
// Indices outside both lists are dropped (fixed to zero).
Matrix schur_complement(const SparseMatrix& A, std::span<const int> interface_dofs,
                        std::span<const int> eliminated_dofs);
// Convenience: everything not in interface_dofs is eliminated.
Matrix schur_complement(const SparseMatrix& A, std::span<const int> interface_dofs);

struct BoxQPResult {
  Vector x;
  int iterations = 0;
  double kkt_residual = 0.0;
};

// min 1/2 x^T H x + c^T x subject to lo <= x <= hi (H symmetric positive definite).
BoxQPResult box_qp(const Matrix& H, const Vector& c, const Vector& lo, const Vector& hi);

double box_qp_kkt_residual(const Matrix& H, const Vector& c, const Vector& lo, const Vector& hi, const Vector& x);

// Smallest eigenvalue of K x = lambda M x (both SPD) by shifted inverse iteration.
double smallest_generalized_eigenvalue(const SparseMatrix& K, const SparseMatrix& M, int max_iter = 500,
                                       double tol = 1e-10);

}  // namespace mpoc

#endif
