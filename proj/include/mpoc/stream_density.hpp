#ifndef MPOC_STREAM_DENSITY_HPP
#define MPOC_STREAM_DENSITY_HPP

#include "mpoc/fe_space.hpp"
#include "mpoc/linalg.hpp"

#include <complex>

namespace mpoc {

inline double real_part(double x) { return x; }
inline double real_part(const std::complex<double>& z) { return z.real(); }

// Positive C1 profile eta through (knot, value) pairs: shape-preserving cubic Hermite with
// three-point slopes limited by the Hyman filter, zero end slopes, constant outside the knots.
class DensityProfile {
 public:
  DensityProfile() : values_{1.0} {}
  static DensityProfile constant(double value);
  // Knots must be strictly increasing and values positive.
  static DensityProfile from_knots(std::vector<double> knots, std::vector<double> values);

  template <class T>
  T eval(const T& y) const {
    const double yr = real_part(y);
    if (knots_.size() < 2 || yr <= knots_.front()) return T(values_.front());
    if (yr >= knots_.back()) return T(values_.back());
    const size_t i = interval(yr);
    const double h = knots_[i + 1] - knots_[i];
    const T t = (y - knots_[i]) / h;
    const T t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * values_[i] + (t3 - 2.0 * t2 + t) * (h * slopes_[i]) +
           (-2.0 * t3 + 3.0 * t2) * values_[i + 1] + (t3 - t2) * (h * slopes_[i + 1]);
  }

  template <class T>
  T derivative(const T& y) const {
    const double yr = real_part(y);
    if (knots_.size() < 2 || yr <= knots_.front() || yr >= knots_.back()) return T(0.0);
    const size_t i = interval(yr);
    const double h = knots_[i + 1] - knots_[i];
    const T t = (y - knots_[i]) / h;
    const T t2 = t * t;
    return ((6.0 * t2 - 6.0 * t) * values_[i] + (3.0 * t2 - 4.0 * t + 1.0) * (h * slopes_[i]) +
            (-6.0 * t2 + 6.0 * t) * values_[i + 1] + (3.0 * t2 - 2.0 * t) * (h * slopes_[i + 1])) /
           h;
  }

  double operator()(double y) const { return eval(y); }
  bool is_constant() const { return knots_.size() < 2; }
  double max_value() const;
  double min_value() const;
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& slopes() const { return slopes_; }

 private:
  size_t interval(double y) const;
  std::vector<double> knots_, values_, slopes_;
};

// psi and rho0 sampled at the Γ0 nodes in arc order. A constant rho0 yields a constant
// profile without any monotonicity requirement on psi.
DensityProfile build_eta(const std::vector<double>& psi_on_gamma0, const std::vector<double>& rho0_on_gamma0);

struct DensityValues {
  QuadField rho;
  QuadField drho;
};
DensityValues evaluate_density(const DensityProfile& profile, const SpaceSet& s, const Vector& psi);

// Stream-function operator: u -> psi with -Δpsi = rot u and boundary values from the
// line integral of u.n starting at x0 and running into Γ0 first.
class StreamOperator {
 public:
  StreamOperator() = default;
  explicit StreamOperator(const SpaceSet& s);

  // ∫_Γ u.n (discrete quadratic trace, exact edge integration).
  double boundary_flux(const Vector& u) const;
  // Boundary values of psi on every boundary node (zero at interior nodes); throws on a flux imbalance.
  Vector boundary_values(const Vector& u, bool check_flux = true) const;
  Vector solve(const Vector& u, const Vector& psi_bc) const;
  Vector apply(const Vector& u) const { return solve(u, boundary_values(u, false)); }
  Vector apply_homogeneous(const Vector& u) const;
  // r with <r, v> = (q, N0 v): one Poisson solve -Δz = q, z = 0 on Γ, then (z, rot v).
  Vector apply_adjoint(const QuadField& q) const;
  // Exact transpose of the full map u -> psi (including the boundary line integral).
  Vector apply_transpose(const Vector& y) const;
  // Columns of psi for the columns of U.
  Matrix apply_dense(const Matrix& U) const;

  const SparseMatrix& boundary_operator() const { return L_; }
  const SparseMatrix& stiffness() const { return K_; }
  const SparseMatrix& rot_u() const { return Ruz_; }
  const Factorization& interior_factorization() const { return Kii_; }

 private:
  const SpaceSet* s_ = nullptr;
  SparseMatrix K_, Ruz_, L_, Kib_;
  Factorization Kii_;
  std::vector<int> interior_, boundary_;
};

// Free-function forms of the operations above.
Vector psi_boundary_values(const StreamOperator& op, const Vector& u);
Vector solve_stream(const StreamOperator& op, const Vector& u, const Vector& psi_bc);
Vector apply_stream_adjoint(const StreamOperator& op, const QuadField& q);

}  // namespace mpoc

#endif
