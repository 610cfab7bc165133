#include "mpoc/linalg.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mpoc {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

SparseMatrix make_sparse(int rows, int cols, const std::vector<Triplet>& triplets) {
  SparseMatrix A(rows, cols);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

double symmetry_defect(const SparseMatrix& A) {
  SparseMatrix At = A.transpose();
  SparseMatrix D = A - At;
  double scale = 0.0, defect = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  for (int k = 0; k < D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(D, k); it; ++it) defect = std::max(defect, std::abs(it.value()));
  return scale > 0 ? defect / scale : 0.0;
}

struct Factorization::Impl {
  Eigen::SimplicialLDLT<ColMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
};

Factorization::Factorization() = default;
Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Factorization::Factorization(const SparseMatrix& A, bool symmetric)
    : impl_(std::make_unique<Impl>()), n_(static_cast<int>(A.rows())), symmetric_(symmetric) {
  if (A.rows() != A.cols()) throw NumericalError("factorize: matrix is not square");
  ColMatrix C = A;
  C.makeCompressed();
  if (n_ == 0) return;
  if (symmetric) {
    impl_->ldlt.compute(C);
    if (impl_->ldlt.info() != Eigen::Success) throw NumericalError("factorize: LDL^T failed (singular or not factorizable)");
    const Vector d = impl_->ldlt.vectorD();
    double dmax = d.cwiseAbs().maxCoeff();
    for (int i = 0; i < d.size(); ++i)
      if (!(std::abs(d[i]) > 1e-14 * dmax))
        throw NumericalError("factorize: singular pivot at index " + std::to_string(i) + " (LDL^T)");
  } else {
    impl_->lu.analyzePattern(C);
    impl_->lu.factorize(C);
    if (impl_->lu.info() != Eigen::Success)
      throw NumericalError("factorize: LU failed: " + impl_->lu.lastErrorMessage());
    if (!std::isfinite(impl_->lu.logAbsDeterminant()))
      throw NumericalError("factorize: singular pivot (LU, zero determinant)");
  }
}

Factorization factorize(const SparseMatrix& A, bool symmetric) { return Factorization(A, symmetric); }

Vector Factorization::solve(const Vector& b) const {
  if (n_ == 0) return Vector();
  if (!impl_) throw NumericalError("solve on empty factorization");
  Vector x = symmetric_ ? Vector(impl_->ldlt.solve(b)) : Vector(impl_->lu.solve(b));
  if (!x.allFinite()) throw NumericalError("solve produced non-finite values");
  return x;
}

Matrix Factorization::solve(const Matrix& B) const {
  if (n_ == 0) return Matrix(0, B.cols());
  if (!impl_) throw NumericalError("solve on empty factorization");
  Matrix X = symmetric_ ? Matrix(impl_->ldlt.solve(B)) : Matrix(impl_->lu.solve(B));
  if (!X.allFinite()) throw NumericalError("solve produced non-finite values");
  return X;
}

SparseMatrix submatrix(const SparseMatrix& A, std::span<const int> rows, std::span<const int> cols) {
  std::vector<int> col_map(A.cols(), -1);
  for (size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<int>(j);
  std::vector<Triplet> trip;
  for (size_t i = 0; i < rows.size(); ++i)
    for (SparseMatrix::InnerIterator it(A, rows[i]); it; ++it) {
      int j = col_map[it.col()];
      if (j >= 0) trip.emplace_back(static_cast<int>(i), j, it.value());
    }
  return make_sparse(static_cast<int>(rows.size()), static_cast<int>(cols.size()), trip);
}

Matrix schur_complement(const SparseMatrix& A, std::span<const int> interface_dofs, std::span<const int> eliminated_dofs) {
  SparseMatrix Agg = submatrix(A, interface_dofs, interface_dofs);
  Matrix S = Matrix(Agg);
  if (!eliminated_dofs.empty() && !interface_dofs.empty()) {
    SparseMatrix Aii = submatrix(A, eliminated_dofs, eliminated_dofs);
    SparseMatrix Aig = submatrix(A, eliminated_dofs, interface_dofs);
    Factorization F(Aii, true);
    Matrix X = F.solve(Matrix(Aig));
    S -= Matrix(Aig).transpose() * X;
  }
  return 0.5 * (S + S.transpose());
}

Matrix schur_complement(const SparseMatrix& A, std::span<const int> interface_dofs) {
  std::vector<char> in_g(A.rows(), 0);
  for (int g : interface_dofs) in_g[g] = 1;
  std::vector<int> elim;
  for (int i = 0; i < A.rows(); ++i)
    if (!in_g[i]) elim.push_back(i);
  return schur_complement(A, interface_dofs, elim);
}

double box_qp_kkt_residual(const Matrix& H, const Vector& c, const Vector& lo, const Vector& hi, const Vector& x) {
  Vector g = H * x + c;
  Vector proj = (x - g).cwiseMax(lo).cwiseMin(hi);
  return (x - proj).lpNorm<Eigen::Infinity>();
}

BoxQPResult box_qp(const Matrix& H, const Vector& c, const Vector& lo, const Vector& hi) {
  const int n = static_cast<int>(c.size());
  if (H.rows() != n || H.cols() != n || lo.size() != n || hi.size() != n) throw InputError("box_qp: dimension mismatch");
  if (n > 1000) throw InputError("box_qp: dimension exceeds 1000");
  for (int i = 0; i < n; ++i)
    if (lo[i] > hi[i]) throw InputError("box_qp: empty box");
  BoxQPResult res;
  if (n == 0) return res;

  enum Status { Free, Lower, Upper };
  std::vector<Status> st(n, Free);
  Vector x = H.llt().solve(-c).cwiseMax(lo).cwiseMin(hi);
  for (int i = 0; i < n; ++i) {
    if (x[i] <= lo[i]) st[i] = Lower;
    else if (x[i] >= hi[i]) st[i] = Upper;
  }
  const double scale = std::max({1.0, H.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()});
  const int cap = 20 * n + 100;
  for (int iter = 0; iter < cap; ++iter) {
    res.iterations = iter + 1;
    std::vector<int> F;
    for (int i = 0; i < n; ++i) {
      if (st[i] == Lower) x[i] = lo[i];
      else if (st[i] == Upper) x[i] = hi[i];
      else F.push_back(i);
    }
    Vector target = x;
    if (!F.empty()) {
      const int nf = static_cast<int>(F.size());
      Matrix Hff(nf, nf);
      Vector rhs(nf);
      for (int a = 0; a < nf; ++a) {
        double r = -c[F[a]];
        for (int j = 0; j < n; ++j)
          if (st[j] != Free) r -= H(F[a], j) * x[j];
        rhs[a] = r;
        for (int b = 0; b < nf; ++b) Hff(a, b) = H(F[a], F[b]);
      }
      Vector xf = Hff.ldlt().solve(rhs);
      for (int a = 0; a < nf; ++a) target[F[a]] = xf[a];
    }
    // Largest feasible step toward target.
    double alpha = 1.0;
    int blocking = -1;
    Status block_status = Free;
    for (int i : F) {
      double d = target[i] - x[i];
      if (d < 0 && target[i] < lo[i]) {
        double a = (lo[i] - x[i]) / d;
        if (a < alpha) { alpha = a; blocking = i; block_status = Lower; }
      } else if (d > 0 && target[i] > hi[i]) {
        double a = (hi[i] - x[i]) / d;
        if (a < alpha) { alpha = a; blocking = i; block_status = Upper; }
      }
    }
    alpha = std::max(alpha, 0.0);
    for (int i : F) x[i] += alpha * (target[i] - x[i]);
    if (blocking >= 0) {
      st[blocking] = block_status;
      continue;
    }
    Vector g = H * x + c;
    int worst = -1;
    double worst_val = 1e-13 * scale;
    for (int i = 0; i < n; ++i) {
      double viol = st[i] == Lower ? -g[i] : st[i] == Upper ? g[i] : 0.0;
      if (viol > worst_val) { worst_val = viol; worst = i; }
    }
    if (worst < 0) {
      res.x = x;
      res.kkt_residual = box_qp_kkt_residual(H, c, lo, hi, x);
      return res;
    }
    st[worst] = Free;
  }
  throw NumericalError("box_qp: iteration cap reached");
}

double smallest_generalized_eigenvalue(const SparseMatrix& K, const SparseMatrix& M, int max_iter, double tol) {
  Factorization F(K, true);
  Vector x = Vector::Ones(K.rows());
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector y = F.solve(Vector(M * x));
    double norm = std::sqrt(y.dot(M * y));
    y /= norm;
    double next = y.dot(K * y);
    x = y;
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace mpoc
