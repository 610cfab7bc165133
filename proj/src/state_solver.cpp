#include "mpoc/state_solver.hpp"

#include "mpoc/state_residual.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mpoc {

namespace {

SparseMatrix interior_velocity_basis(const SpaceSet& s) {
  const int N = s.n_nodes;
  std::vector<Triplet> trip;
  int col = 0;
  for (int n : s.interior_nodes) {
    trip.emplace_back(n, col++, 1.0);
    trip.emplace_back(N + n, col++, 1.0);
  }
  return make_sparse(2 * N, col, trip);
}

std::vector<int> unpinned_pressure(const SpaceSet& s) {
  std::vector<int> rows;
  for (int i = 0; i < s.pressure_dim(); ++i)
    if (i != s.pinned_pressure) rows.push_back(i);
  return rows;
}

double pressure_mean(const SpaceSet& s, const Vector& p) {
  double integral = 0.0, area = 0.0;
  for (int t = 0; t < s.cells(); ++t) {
    const auto& tri = s.mesh.triangles[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = s.quad[t * kQuadPoints + q];
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += qp.p1[k] * p[tri[k]];
      integral += qp.w * v;
      area += qp.w;
    }
  }
  return integral / area;
}

struct MixedResult {
  Vector u;  // P y, full length
  Vector p;  // zero-mean pressure
};

// [P^T A P, P^T D^T E; E^T D P, 0] [y; pi] = [P^T ru; E^T rp], E dropping the pinned pressure.
MixedResult solve_mixed(const Problem& pb, const SparseMatrix& A, const SparseMatrix& P, const Vector& ru,
                        const Vector& rp) {
  const SpaceSet& s = pb.spaces();
  std::vector<int> prow = unpinned_pressure(s);
  const int m = static_cast<int>(P.cols());
  const int np = static_cast<int>(prow.size());
  Vector rhs(m + np);
  rhs.head(m) = P.transpose() * ru;
  for (int k = 0; k < np; ++k) rhs[m + k] = rp[prow[k]];
  Factorization f(saddle_matrix(pb, A, P), false);
  Vector x = f.solve(rhs);
  MixedResult out;
  out.u = P * x.head(m);
  out.p = Vector::Zero(s.pressure_dim());
  for (int k = 0; k < np; ++k) out.p[prow[k]] = x[m + k];
  out.p.array() -= pressure_mean(s, out.p);
  return out;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

double nonslip_trace_norm(const Problem& pb, const Vector& ud) {
  const SpaceSet& s = pb.spaces();
  const auto& hn = pb.halfnorm(Segment::NonSlip);
  Vector tx(hn.nodes.size()), ty(hn.nodes.size());
  for (size_t k = 0; k < hn.nodes.size(); ++k) {
    tx[k] = ud[hn.nodes[k]];
    ty[k] = ud[s.n_nodes + hn.nodes[k]];
  }
  return std::sqrt(std::max(0.0, hn.norm2(tx) + hn.norm2(ty)));
}

double whole_trace_norm(const Problem& pb, const Vector& wd) {
  const auto& hn = pb.halfnorm(Segment::Whole);
  Vector t(hn.nodes.size());
  for (size_t k = 0; k < hn.nodes.size(); ++k) t[k] = wd[hn.nodes[k]];
  return std::sqrt(std::max(0.0, hn.norm2(t)));
}

double l2_norm_quad(const SpaceSet& s, const QuadField& a, const QuadField* b = nullptr) {
  double sum = 0.0;
  for (size_t k = 0; k < a.size(); ++k) sum += s.quad[k].w * (a[k] * a[k] + (b ? (*b)[k] * (*b)[k] : 0.0));
  return std::sqrt(sum);
}

}  // namespace

SparseMatrix saddle_matrix(const Problem& pb, const SparseMatrix& A, const SparseMatrix& P) {
  const SpaceSet& s = pb.spaces();
  std::vector<int> prow = unpinned_pressure(s);
  std::vector<int> allcols(A.cols());
  for (int i = 0; i < static_cast<int>(A.cols()); ++i) allcols[i] = i;
  SparseMatrix Dsel = submatrix(pb.divergence(), prow, allcols);
  SparseMatrix PtAP = P.transpose() * A * P;
  SparseMatrix DP = Dsel * P;
  const int m = static_cast<int>(P.cols());
  const int np = static_cast<int>(prow.size());
  std::vector<Triplet> trip;
  for (int r = 0; r < PtAP.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(PtAP, r); it; ++it) trip.emplace_back(r, it.col(), it.value());
  for (int r = 0; r < DP.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(DP, r); it; ++it) {
      trip.emplace_back(m + r, it.col(), it.value());
      trip.emplace_back(it.col(), m + r, it.value());
    }
  return make_sparse(m + np, m + np, trip);
}

Vector lift_velocity(const Problem& pb, const Vector& g1, double* ratio) {
  const SpaceSet& s = pb.spaces();
  Vector ud = pb.velocity_dirichlet(g1);
  const double flux = pb.stream().boundary_flux(ud);
  const double scale = ud.cwiseAbs().maxCoeff() * s.mesh.boundary_length();
  if (std::abs(flux) > 1e-10 * scale) {
    std::ostringstream os;
    os << "boundary flux imbalance " << flux << " (∫_Γ0 u0.n + ∫_Γ1 g1.n must vanish)";
    throw InputError(os.str());
  }
  if (scale == 0.0) {
    if (ratio) *ratio = 0.0;
    return ud;
  }
  SparseMatrix P = interior_velocity_basis(s);
  Vector ru = -(pb.A() * ud);
  Vector rp = -(pb.divergence() * ud);
  MixedResult m = solve_mixed(pb, pb.A(), P, ru, rp);
  Vector lift = ud + m.u;
  if (ratio) {
    const double tn = nonslip_trace_norm(pb, ud);
    *ratio = tn > 0.0 ? h1_norm(s, pb.vector_gram(), lift) / tn : 0.0;
  }
  return lift;
}

Vector lift_rotation(const Problem& pb, const Vector& g2) {
  const SpaceSet& s = pb.spaces();
  Vector wd = pb.rotation_dirichlet(g2);
  Vector kw = pb.stiffness() * wd;
  Vector rhs(s.interior_nodes.size());
  for (size_t k = 0; k < s.interior_nodes.size(); ++k) rhs[k] = -kw[s.interior_nodes[k]];
  Vector x = pb.stream().interior_factorization().solve(rhs);
  for (size_t k = 0; k < s.interior_nodes.size(); ++k) wd[s.interior_nodes[k]] = x[k];
  return wd;
}

Vector solve_w_linear(const Problem& pb, const QuadField& rho, const Vector& a, const Vector& u_total,
                      const Vector& w_lift) {
  const SpaceSet& s = pb.spaces();
  const ModelParams& mp = pb.params();
  SparseMatrix L = mp.mu2 * pb.stiffness() + assemble_Btilde(s, rho, a) + (4.0 * mp.mur) * pb.mass();
  Vector rhs = (2.0 * mp.mur) * (pb.rot_u() * u_total) + assemble_scalar_load(s, &rho, pb.g()) - L * w_lift;
  const auto& in = s.interior_nodes;
  Vector ri(in.size());
  for (size_t k = 0; k < in.size(); ++k) ri[k] = rhs[in[k]];
  Vector out = Vector::Zero(s.n_nodes);
  if (in.empty()) return out;
  Factorization f(submatrix(L, in, in), false);
  Vector x = f.solve(ri);
  for (size_t k = 0; k < in.size(); ++k) out[in[k]] = x[k];
  return out;
}

PicardStep picard_step(const Problem& pb, const Vector& u_lift, const Vector& w_lift, const Vector& u_tilde) {
  const SpaceSet& s = pb.spaces();
  const ModelParams& mp = pb.params();
  PicardStep st;
  const Vector a = u_tilde + u_lift;
  st.psi = pb.stream().solve(a, pb.stream().boundary_values(a, false));
  st.density = evaluate_density(pb.profile(), s, st.psi);
  check_positive_density(s, st.density.rho);
  const QuadField& rho = st.density.rho;
  st.w_hat = solve_w_linear(pb, rho, a, a, w_lift);
  const Vector w = w_lift + st.w_hat;

  SparseMatrix Bl_first = assemble_B_first_slot(s, rho, u_lift);
  SparseMatrix Amat = mp.mu1 * pb.A() + assemble_B(s, rho, a) + Bl_first;
  Vector rhs = (2.0 * mp.mur) * (pb.rot_w() * w) + assemble_load(s, &rho, pb.fx(), pb.fy()) -
               mp.mu1 * (pb.A() * u_lift) - assemble_B(s, rho, u_lift) * u_lift;
  MixedResult m = solve_mixed(pb, Amat, s.P, rhs, Vector::Zero(s.pressure_dim()));
  st.u_hat = m.u;
  st.p = m.p;

  const Vector& uh = st.u_hat;
  const double lhs = mp.mu1 * uh.dot(pb.A() * uh);
  const double rhs_e = uh.dot(rhs - Bl_first * uh - pb.divergence().transpose() * st.p);
  const double denom = std::max({std::abs(lhs), std::abs(rhs_e), 1e-300});
  st.energy_residual = (lhs == 0.0 && rhs_e == 0.0) ? 0.0 : std::abs(lhs - rhs_e) / denom;
  return st;
}

double theta_bound(const Problem& pb, const ControlPair& controls) {
  const SpaceSet& s = pb.spaces();
  const double ug = nonslip_trace_norm(pb, pb.velocity_dirichlet(controls.g1));
  const double wg = whole_trace_norm(pb, pb.rotation_dirichlet(controls.g2));
  const double f = l2_norm_quad(s, pb.fx(), &pb.fy());
  const double g = l2_norm_quad(s, pb.g());
  return ug * wg + ug + wg + ug * ug + f + g;
}

double viscosity_margin(const Problem& pb, const ControlPair& controls) {
  const ModelParams& mp = pb.params();
  const double C = pb.poincare_constant();
  const double wg = whole_trace_norm(pb, pb.rotation_dirichlet(controls.g2));
  const double c_eta = pb.profile().max_value();
  return std::min(2.0 * mp.mu1 - c_eta * C * wg - mp.mur * C, mp.mu2 - mp.mur * C);
}

double state_residual_norm(const Problem& pb, const Vector& u, const Vector& p, const Vector& w, const Vector& psi) {
  const SpaceSet& s = pb.spaces();
  ResidualParts<double> r = evaluate_state_residual<double>(pb, u, p, w, psi);
  double sum = Vector(s.P.transpose() * r.mom).squaredNorm();
  for (int i = 0; i < s.pressure_dim(); ++i)
    if (i != s.pinned_pressure) sum += r.div[i] * r.div[i];
  for (int n : s.interior_nodes) sum += r.rot[n] * r.rot[n];
  sum += r.psi.squaredNorm();
  return std::sqrt(sum);
}

StateSolution solve_state(const Problem& pb, const ControlPair& controls, const SolverOptions& opts) {
  const SpaceSet& s = pb.spaces();
  if (!(opts.tol > 0.0) || opts.max_iter < 1 || !(opts.relaxation > 0.0 && opts.relaxation <= 1.0))
    throw InputError("invalid solver options (tol > 0, max_iter >= 1, 0 < relaxation <= 1)");
  StateSolution out;
  const Vector u_lift = lift_velocity(pb, controls.g1, &out.lift_ratio);
  const Vector w_lift = lift_rotation(pb, controls.g2);
  out.theta_bound = theta_bound(pb, controls);
  const double margin = viscosity_margin(pb, controls);
  out.viscosity_ok = margin > 0.0;
  if (!out.viscosity_ok) {
    std::ostringstream os;
    os << "viscosity condition not met with empirical constants (margin " << margin << ")";
    out.advisory = os.str();
  }

  const SparseMatrix& G = pb.vector_gram();
  Vector ut = Vector::Zero(2 * s.n_nodes);
  Vector p = Vector::Zero(s.pressure_dim());
  double theta = opts.relaxation;
  double prev = -1.0;
  int increases = 0;
  for (int k = 1; k <= opts.max_iter; ++k) {
    PicardStep st;
    try {
      st = picard_step(pb, u_lift, w_lift, ut);
    } catch (const NumericalError& e) {
      if (k == 1) throw;
      out.reason = std::string("sub-solver failure: ") + e.what();
      break;
    }
    if (!all_finite(st.u_hat) || !all_finite(st.p) || !all_finite(st.w_hat)) {
      out.reason = "non-finite iterate";
      break;
    }
    const Vector diff = st.u_hat - ut;
    const double upd = h1_norm(s, G, diff);
    const double unorm = h1_norm(s, G, ut);
    PicardRecord rec;
    rec.iteration = k;
    rec.update_norm = upd;
    rec.relaxation = theta;
    rec.energy_residual = st.energy_residual;
    out.history.push_back(rec);
    p = st.p;
    if (upd <= opts.tol * (1.0 + unorm)) {
      ut = st.u_hat;
      out.converged = true;
      out.reason = "converged";
      break;
    }
    if (prev >= 0.0 && upd > prev) {
      if (++increases >= 2) {
        theta *= 0.5;
        increases = 0;
      }
    } else {
      increases = 0;
    }
    prev = upd;
    ut += theta * diff;
  }
  if (!out.converged && out.reason.empty()) out.reason = "maximum iterations reached";

  out.u = ut + u_lift;
  out.p = p;
  out.psi = pb.stream().solve(out.u, pb.stream().boundary_values(out.u, false));
  DensityValues dv = evaluate_density(pb.profile(), s, out.psi);
  out.rho = dv.rho;
  out.drho = dv.drho;
  if (all_finite(out.u)) {
    out.w = w_lift + solve_w_linear(pb, out.rho, out.u, out.u, w_lift);
    out.residual = state_residual_norm(pb, out.u, out.p, out.w, out.psi);
  } else {
    out.w = w_lift;
    out.residual = std::numeric_limits<double>::infinity();
  }
  out.solution_norm = h1_norm(s, G, out.u) + h1_norm(s, pb.gram(), out.w);
  return out;
}

}  // namespace mpoc
