#include "mpoc/stream_density.hpp"

#include "mpoc/forms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace mpoc {

DensityProfile DensityProfile::constant(double value) {
  if (!(value > 0.0)) throw InputError("density must be positive");
  DensityProfile p;
  p.values_ = {value};
  return p;
}

DensityProfile DensityProfile::from_knots(std::vector<double> knots, std::vector<double> values) {
  if (knots.size() != values.size() || knots.empty()) throw InputError("density profile: knot/value size mismatch");
  for (double v : values)
    if (!(v > 0.0)) throw InputError("density profile: nonpositive value");
  for (size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw InputError("density profile: knots not strictly increasing");
  DensityProfile p;
  const size_t n = knots.size();
  p.knots_ = std::move(knots);
  p.values_ = std::move(values);
  p.slopes_.assign(n, 0.0);
  if (n == 1) {
    p.knots_.clear();
    return p;
  }
  std::vector<double> secant(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) secant[i] = (p.values_[i + 1] - p.values_[i]) / (p.knots_[i + 1] - p.knots_[i]);
  for (size_t i = 1; i + 1 < n; ++i) {
    const double h0 = p.knots_[i] - p.knots_[i - 1], h1 = p.knots_[i + 1] - p.knots_[i];
    const double d0 = secant[i - 1], d1 = secant[i];
    if (d0 * d1 <= 0.0) continue;
    const double d = (h1 * d0 + h0 * d1) / (h0 + h1);
    const double limit = 3.0 * std::min(std::abs(d0), std::abs(d1));
    p.slopes_[i] = std::copysign(std::min(std::abs(d), limit), d0);
  }
  return p;
}

size_t DensityProfile::interval(double y) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), y);
  size_t i = static_cast<size_t>(it - knots_.begin());
  return std::min(i == 0 ? 0 : i - 1, knots_.size() - 2);
}

double DensityProfile::max_value() const { return *std::max_element(values_.begin(), values_.end()); }
double DensityProfile::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

DensityProfile build_eta(const std::vector<double>& psi, const std::vector<double>& rho0) {
  if (psi.size() != rho0.size() || psi.empty()) throw InputError("build_eta: sample size mismatch");
  double lo = rho0[0], hi = rho0[0];
  for (size_t i = 0; i < rho0.size(); ++i) {
    if (!(rho0[i] > 0.0)) {
      std::ostringstream os;
      os << "nonpositive boundary density rho0 = " << rho0[i] << " at sample " << i;
      throw InputError(os.str());
    }
    lo = std::min(lo, rho0[i]);
    hi = std::max(hi, rho0[i]);
  }
  if (hi - lo <= 1e-14 * hi) return DensityProfile::constant(rho0[0]);
  int sign = 0;
  for (size_t i = 1; i < psi.size(); ++i) {
    const double d = psi[i] - psi[i - 1];
    const int sd = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sd == 0 || (sign != 0 && sd != sign))
      throw InputError("inflow/outflow assumption violated: stream function not strictly monotone on Γ0");
    sign = sd;
  }
  std::vector<double> k = psi, v = rho0;
  if (sign < 0) {
    std::reverse(k.begin(), k.end());
    std::reverse(v.begin(), v.end());
  }
  return DensityProfile::from_knots(std::move(k), std::move(v));
}

DensityValues evaluate_density(const DensityProfile& profile, const SpaceSet& s, const Vector& psi) {
  QuadField p = scalar_at_quad(s, psi);
  DensityValues out;
  out.rho.resize(p.size());
  out.drho.resize(p.size());
  for (size_t k = 0; k < p.size(); ++k) {
    out.rho[k] = profile.eval(p[k]);
    out.drho[k] = profile.derivative(p[k]);
  }
  return out;
}

StreamOperator::StreamOperator(const SpaceSet& s) : s_(&s) {
  const int N = s.n_nodes;
  K_ = assemble_Atilde(s);
  Ruz_ = assemble_rot_coupling_u(s);
  interior_ = s.interior_nodes;
  boundary_ = s.boundary_nodes;
  Kii_ = Factorization(submatrix(K_, interior_, interior_), true);
  std::vector<int> all(N);
  for (int i = 0; i < N; ++i) all[i] = i;
  Kib_ = submatrix(K_, interior_, all);

  // Line-integral rows: psi(node) as a combination of boundary velocity values.
  BoundaryArc arc = gamma0_arclength(s.mesh);
  const int dir = arc.direction;
  const int nseg = static_cast<int>(s.boundary.size());
  std::unordered_map<int, double> row;  // current psi as a sparse combination of velocity dofs
  std::vector<Triplet> trip;
  auto emit = [&](int node) {
    for (const auto& [col, val] : row)
      if (val != 0.0) trip.emplace_back(node, col, val);
  };
  auto add_half = [&](const BoundarySegmentDofs& seg, const std::array<double, 3>& w, double sign) {
    for (int k = 0; k < 3; ++k)
      for (int c = 0; c < 2; ++c) row[c * N + seg.nodes[k]] += sign * seg.length * w[k] * seg.normal[c];
  };
  const std::array<double, 3> first = {5.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0};
  const std::array<double, 3> second = {-1.0 / 24.0, 1.0 / 3.0, 5.0 / 24.0};
  emit(s.mesh.arc_length_origin);
  for (int step = 0; step < nseg; ++step) {
    if (dir > 0) {
      const auto& seg = s.boundary[step];
      add_half(seg, first, 1.0);
      emit(seg.nodes[1]);
      add_half(seg, second, 1.0);
      if (step + 1 < nseg) emit(seg.nodes[2]);
    } else {
      const auto& seg = s.boundary[nseg - 1 - step];
      add_half(seg, second, -1.0);
      emit(seg.nodes[1]);
      add_half(seg, first, -1.0);
      if (step + 1 < nseg) emit(seg.nodes[0]);
    }
  }
  L_ = make_sparse(N, 2 * N, trip);
}

double StreamOperator::boundary_flux(const Vector& u) const {
  const int N = s_->n_nodes;
  double flux = 0.0;
  for (const auto& seg : s_->boundary) {
    for (int k = 0; k < 3; ++k) {
      const double w = seg.length * (k == 1 ? 2.0 / 3.0 : 1.0 / 6.0);
      flux += w * (seg.normal.x() * u[seg.nodes[k]] + seg.normal.y() * u[N + seg.nodes[k]]);
    }
  }
  return flux;
}

Vector StreamOperator::boundary_values(const Vector& u, bool check_flux) const {
  if (check_flux) {
    const int N = s_->n_nodes;
    double umax = 0.0;
    for (int n : boundary_) umax = std::max({umax, std::abs(u[n]), std::abs(u[N + n])});
    const double flux = boundary_flux(u);
    const double scale = umax * s_->mesh.boundary_length();
    if (std::abs(flux) > 1e-10 * scale) {
      std::ostringstream os;
      os << "boundary flux imbalance " << flux << " (compatibility ∫_Γ u.n = 0 violated)";
      throw InputError(os.str());
    }
  }
  return L_ * u;
}

Vector StreamOperator::solve(const Vector& u, const Vector& psi_bc) const {
  const int N = s_->n_nodes;
  Vector psi = Vector::Zero(N);
  for (int n : boundary_) psi[n] = psi_bc[n];
  Vector rhs_full = Ruz_ * u;
  Vector rhs(interior_.size());
  Vector kb = Kib_ * psi;
  for (size_t k = 0; k < interior_.size(); ++k) rhs[k] = rhs_full[interior_[k]] - kb[k];
  Vector pi = Kii_.solve(rhs);
  for (size_t k = 0; k < interior_.size(); ++k) psi[interior_[k]] = pi[k];
  return psi;
}

Vector StreamOperator::apply_homogeneous(const Vector& u) const { return solve(u, Vector::Zero(s_->n_nodes)); }

Vector StreamOperator::apply_adjoint(const QuadField& q) const {
  Vector qv = assemble_scalar_load(*s_, nullptr, q);
  Vector qi(interior_.size());
  for (size_t k = 0; k < interior_.size(); ++k) qi[k] = qv[interior_[k]];
  Vector zi = Kii_.solve(qi);
  Vector z = Vector::Zero(s_->n_nodes);
  for (size_t k = 0; k < interior_.size(); ++k) z[interior_[k]] = zi[k];
  return Ruz_.transpose() * z;
}

Vector StreamOperator::apply_transpose(const Vector& y) const {
  const int N = s_->n_nodes;
  Vector yi(interior_.size());
  for (size_t k = 0; k < interior_.size(); ++k) yi[k] = y[interior_[k]];
  Vector zi = Kii_.solve(yi);
  Vector z = Vector::Zero(N);
  for (size_t k = 0; k < interior_.size(); ++k) z[interior_[k]] = zi[k];
  Vector tail = y - K_ * z;
  for (int n : interior_) tail[n] = 0.0;
  return Vector(Ruz_.transpose() * z) + Vector(L_.transpose() * tail);
}

Matrix StreamOperator::apply_dense(const Matrix& U) const {
  const int N = s_->n_nodes;
  Matrix bc = L_ * U;
  for (int n : interior_) bc.row(n).setZero();
  Matrix rhs_full = Ruz_ * U;
  Matrix kb = Kib_ * bc;
  Matrix rhs(interior_.size(), U.cols());
  for (size_t k = 0; k < interior_.size(); ++k) rhs.row(k) = rhs_full.row(interior_[k]) - kb.row(k);
  Matrix pi = Kii_.solve(rhs);
  Matrix psi = bc;
  for (size_t k = 0; k < interior_.size(); ++k) psi.row(interior_[k]) = pi.row(k);
  (void)N;
  return psi;
}

Vector psi_boundary_values(const StreamOperator& op, const Vector& u) { return op.boundary_values(u, true); }
Vector solve_stream(const StreamOperator& op, const Vector& u, const Vector& psi_bc) { return op.solve(u, psi_bc); }
Vector apply_stream_adjoint(const StreamOperator& op, const QuadField& q) { return op.apply_adjoint(q); }

}  // namespace mpoc
