#include "mpoc/penalty_path.hpp"

#include <cmath>

namespace mpoc {

namespace {

Matrix trace_metric_columns(const HalfNormOperator& h, const Matrix& E, int N, int components) {
  Matrix out = Matrix::Zero(E.rows(), E.cols());
  const Eigen::Index n = static_cast<Eigen::Index>(h.nodes.size());
  for (int c = 0; c < components; ++c) {
    Matrix t(n, E.cols());
    for (Eigen::Index k = 0; k < n; ++k) t.row(k) = E.row(c * N + h.nodes[k]);
    Matrix st = h.S * t;
    for (Eigen::Index k = 0; k < n; ++k) out.row(c * N + h.nodes[k]) = st.row(k);
  }
  return out;
}

Matrix interleave(const Matrix& S) {
  const Eigen::Index n = S.rows();
  Matrix H = Matrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) H(2 * i, 2 * j) = H(2 * i + 1, 2 * j + 1) = S(i, j);
  return H;
}

// Layout of the unknowns: [r | w | s | g2] with u = U r and g1 = g1_anchor + Za s.
struct Layout {
  Matrix U, Za;
  Vector g1a;
  int nr = 0, nw = 0, ns = 0, n3 = 0;
  int size() const { return nr + nw + ns + n3; }
  PenaltyPoint point(const Vector& x) const {
    PenaltyPoint p;
    p.u = U * x.head(nr);
    p.w = x.segment(nr, nw);
    p.g1 = g1a + Za * x.segment(nr + nw, ns);
    p.g2 = x.tail(n3);
    return p;
  }
};

Layout make_layout(const Problem& pb, const PenaltyPoint& anchor) {
  const SpaceSet& s = pb.spaces();
  Layout L;
  Matrix Ps = Matrix(s.P_sigma);
  Matrix DP = Matrix(pb.divergence()) * Ps;
  Eigen::BDCSVD<Matrix> svd(DP, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  const double smax = sv.size() ? sv[0] : 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-11 * smax) ++rank;
  Matrix Z = svd.matrixV().rightCols(Ps.cols() - rank);
  L.U = Ps * Z;
  L.nr = static_cast<int>(L.U.cols());
  L.nw = s.n_nodes;
  const Vector& a = pb.flux_functional();
  const int n1 = static_cast<int>(a.size());
  if (a.norm() > 0.0) {
    Eigen::HouseholderQR<Matrix> qr{Matrix(a)};
    Matrix Q = qr.householderQ() * Matrix::Identity(n1, n1);
    L.Za = Q.rightCols(n1 - 1);
  } else {
    L.Za = Matrix::Identity(n1, n1);
  }
  L.ns = static_cast<int>(L.Za.cols());
  L.n3 = pb.n_control3();
  L.g1a = anchor.g1;
  return L;
}

double s_norm(const HalfNormOperator& h, const Vector& d, bool interleaved) {
  return std::sqrt(std::max(0.0, interleaved ? h.norm2_interleaved(d) : h.norm2(d)));
}

}  // namespace

PenaltyPoint anchor_from(const OptimizationResult& r) {
  PenaltyPoint p;
  p.u = r.state.u;
  p.w = r.state.w;
  p.g1 = r.controls.g1;
  p.g2 = r.controls.g2;
  return p;
}

PenaltyPathReport penalty_path_experiment(const Problem& pb, const Targets& targets, const PenaltyPoint& anchor,
                                          const ControlPair& bounds, const PenaltyPathOptions& opts) {
  if (opts.eps.empty()) throw InputError("penalty schedule is empty");
  for (size_t i = 0; i < opts.eps.size(); ++i) {
    if (!(opts.eps[i] > 0.0)) throw InputError("penalty schedule entries must be positive");
    if (i > 0 && !(opts.eps[i] < opts.eps[i - 1])) throw InputError("penalty schedule must be strictly decreasing");
  }
  const SpaceSet& s = pb.spaces();
  const int N = s.n_nodes;
  const auto& beta = pb.params().beta;
  RieszOperators riesz(pb);
  Layout L = make_layout(pb, anchor);
  const int nx = L.size();

  Vector x0(nx);
  x0.head(L.nr) = L.U.transpose() * anchor.u;
  x0.segment(L.nr, L.nw) = anchor.w;
  x0.segment(L.nr + L.nw, L.ns).setZero();
  x0.tail(L.n3) = anchor.g2;
  const double recon = (L.U * x0.head(L.nr) - anchor.u).norm();
  if (recon > 1e-8 * (1.0 + anchor.u.norm()))
    throw InputError("anchor velocity is not discretely divergence-free with u.n = 0 on Γ2");

  const auto& h1 = pb.halfnorm(Segment::Gamma1);
  const auto& h3 = pb.halfnorm(Segment::Gamma3);
  const Matrix S1 = interleave(h1.S);
  const double J_anchor = evaluate_J(pb, targets, anchor.u, anchor.w, pb.stream().apply(anchor.u), anchor.g1,
                                     anchor.g2)
                              .total;

  // Quadrature evaluation matrix for the density term.
  std::vector<Triplet> qt;
  for (int t = 0; t < s.cells(); ++t)
    for (int q = 0; q < kQuadPoints; ++q)
      for (int a = 0; a < 6; ++a) qt.emplace_back(t * kQuadPoints + q, s.cell_nodes[t][a], s.quad[t * kQuadPoints + q].phi[a]);
  const SparseMatrix Phi = make_sparse(static_cast<int>(s.quad.size()), N, qt);

  // Constant part of the Gauss-Newton matrix.
  Matrix H0 = Matrix::Zero(nx, nx);
  {
    const SparseMatrix Hu = beta[0] * pb.rotrot() + beta[1] * pb.vector_mass() + pb.vector_gram();
    H0.topLeftCorner(L.nr, L.nr) = L.U.transpose() * (Hu * L.U);
    H0.block(L.nr, L.nr, L.nw, L.nw) = Matrix(beta[2] * pb.mass() + pb.gram());
    H0.block(L.nr + L.nw, L.nr + L.nw, L.ns, L.ns) = (beta[4] + 1.0) * L.Za.transpose() * S1 * L.Za;
    H0.bottomRightCorner(L.n3, L.n3) = (beta[5] + 1.0) * h3.S;
  }
  // Trace-mismatch Jacobians are constant.
  Matrix Ju = Matrix::Zero(2 * N, nx), Jw = Matrix::Zero(N, nx);
  {
    std::vector<int> c1(N, -1), c3(N, -1);
    for (int k = 0; k < pb.n_control1(); ++k) c1[s.control1_nodes[k]] = k;
    for (int k = 0; k < pb.n_control3(); ++k) c3[s.control3_nodes[k]] = k;
    for (int n : s.nonslip_nodes)
      for (int c = 0; c < 2; ++c) {
        Ju.row(c * N + n).head(L.nr) = L.U.row(c * N + n);
        if (c1[n] >= 0) Ju.row(c * N + n).segment(L.nr + L.nw, L.ns) = -L.Za.row(2 * c1[n] + c);
      }
    for (int n : s.boundary_nodes) {
      Jw(n, L.nr + n) = 1.0;
      if (c3[n] >= 0) Jw(n, L.nr + L.nw + L.ns + c3[n]) = -1.0;
    }
  }
  const Matrix HtraceU = Ju.transpose() * trace_metric_columns(pb.halfnorm(Segment::NonSlip), Ju, N, 2);
  const Matrix HtraceW = Jw.transpose() * trace_metric_columns(pb.halfnorm(Segment::Whole), Jw, N, 1);

  auto value = [&](const Vector& x, double eps) { return evaluate_J_eps(pb, riesz, targets, L.point(x), anchor, eps); };
  auto gradient = [&](const Vector& x, double eps) {
    PenaltyGradient g = penalty_gradient(pb, riesz, targets, L.point(x), anchor, eps);
    Vector gx(nx);
    gx.head(L.nr) = L.U.transpose() * g.du;
    gx.segment(L.nr, L.nw) = g.dw;
    gx.segment(L.nr + L.nw, L.ns) = L.Za.transpose() * g.dg1;
    gx.tail(L.n3) = g.dg2;
    return gx;
  };
  auto gn_matrix = [&](const Vector& x, double eps) {
    PenaltyPoint p = L.point(x);
    Vector psi = pb.stream().apply(p.u);
    StateJacobian J = linearize_state(pb, p.u, Vector::Zero(s.pressure_dim()), p.w, psi);
    Matrix Nu = pb.stream().apply_dense(L.U);
    Matrix H = H0 + HtraceU / eps + HtraceW / eps;
    Matrix Jm = Matrix::Zero(2 * N, nx);
    Jm.leftCols(L.nr) = J.mom_u * L.U + J.mom_psi * Nu;
    Jm.middleCols(L.nr, L.nw) = Matrix(J.mom_w);
    H += Jm.transpose() * riesz.velocity(Jm) / eps;
    Matrix Jr = Matrix::Zero(N, nx);
    Jr.leftCols(L.nr) = J.rot_u * L.U + J.rot_psi * Nu;
    Jr.middleCols(L.nr, L.nw) = Matrix(J.rot_w);
    H += Jr.transpose() * riesz.rotation(Jr) / eps;
    if (beta[3] > 0.0) {
      DensityValues dv = evaluate_density(pb.profile(), s, psi);
      Matrix B = Phi * Nu;
      Vector wts(B.rows());
      for (Eigen::Index k = 0; k < B.rows(); ++k) wts[k] = beta[3] * s.quad[k].w * dv.drho[k] * dv.drho[k];
      H.topLeftCorner(L.nr, L.nr) += B.transpose() * wts.asDiagonal() * B;
    }
    return Matrix(0.5 * (H + H.transpose()));
  };
  auto max_step = [&](const Vector& x, const Vector& d) {
    double t = 1.0;
    const Vector g1 = L.g1a + L.Za * x.segment(L.nr + L.nw, L.ns);
    const Vector dg1 = L.Za * d.segment(L.nr + L.nw, L.ns);
    const Vector g2 = x.tail(L.n3), dg2 = d.tail(L.n3);
    auto limit = [&](double v, double dv, double lo, double hi) {
      if (dv > 0.0) t = std::min(t, std::max(0.0, (hi - v) / dv));
      if (dv < 0.0) t = std::min(t, std::max(0.0, (lo - v) / dv));
    };
    for (Eigen::Index i = 0; i < g1.size(); ++i) limit(g1[i], dg1[i], bounds.g1_lower[i], bounds.g1_upper[i]);
    for (Eigen::Index i = 0; i < g2.size(); ++i) limit(g2[i], dg2[i], bounds.g2_lower[i], bounds.g2_upper[i]);
    return t;
  };

  PenaltyPathReport report;
  for (double eps : opts.eps) {
    PenaltyPathEntry e;
    e.eps = eps;
    e.J_anchor = J_anchor;
    Vector x = x0;
    PenaltyValue v = value(x, eps);
    for (int it = 0; it < opts.max_iter; ++it) {
      const Vector g = gradient(x, eps);
      const Matrix H = gn_matrix(x, eps);
      Eigen::LDLT<Matrix> ldlt(H);
      Vector d = ldlt.solve(-g);
      if (!d.allFinite() || g.dot(d) >= 0.0) d = -g;
      const double slope = g.dot(d);
      if (-slope <= opts.tol * (1.0 + std::abs(v.total))) break;
      double t = max_step(x, d);
      bool accepted = false;
      for (int k = 0; k < 60 && t > 0.0; ++k, t *= 0.5) {
        const Vector xt = x + t * d;
        PenaltyValue vt = value(xt, eps);
        if (std::isfinite(vt.total) && vt.total <= v.total + 1e-4 * t * slope) {
          x = xt;
          v = vt;
          accepted = true;
          break;
        }
      }
      e.iterations = it + 1;
      if (!accepted) {
        e.stagnated = true;
        break;
      }
    }
    e.minimizer = L.point(x);
    e.J_eps = v.total;
    e.J = v.J.total;
    e.defect = compute_penalty_multipliers(pb, riesz, e.minimizer, eps).defect();
    e.dist_u = std::sqrt(std::max(0.0, (e.minimizer.u - anchor.u).dot(pb.vector_gram() * (e.minimizer.u - anchor.u))));
    e.dist_w = std::sqrt(std::max(0.0, (e.minimizer.w - anchor.w).dot(pb.gram() * (e.minimizer.w - anchor.w))));
    e.dist_g1 = s_norm(h1, e.minimizer.g1 - anchor.g1, true);
    e.dist_g2 = s_norm(h3, e.minimizer.g2 - anchor.g2, false);
    e.sandwich = e.J <= e.J_eps && e.J_eps <= e.J_anchor;
    report.entries.push_back(std::move(e));
  }
  report.sandwich = true;
  report.distances_monotone = true;
  for (size_t i = 0; i < report.entries.size(); ++i) {
    report.sandwich = report.sandwich && report.entries[i].sandwich;
    if (i > 0 && report.entries[i].distance() > 1.1 * report.entries[i - 1].distance())
      report.distances_monotone = false;
  }
  return report;
}

}  // namespace mpoc
