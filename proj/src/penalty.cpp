#include "mpoc/penalty.hpp"

#include "mpoc/state_solver.hpp"

#include <cmath>

namespace mpoc {

namespace {

// S applied per component to a full-length vector supported on the operator's nodes.
Vector apply_trace_metric(const HalfNormOperator& h, const Vector& e, int N, int components) {
  Vector out = Vector::Zero(e.size());
  const Eigen::Index n = static_cast<Eigen::Index>(h.nodes.size());
  for (int c = 0; c < components; ++c) {
    Vector t(n);
    for (Eigen::Index k = 0; k < n; ++k) t[k] = e[c * N + h.nodes[k]];
    Vector st = h.S * t;
    for (Eigen::Index k = 0; k < n; ++k) out[c * N + h.nodes[k]] = st[k];
  }
  return out;
}

double anchor_h1(const SparseMatrix& G, const Vector& d) { return d.dot(G * d); }

}  // namespace

RieszOperators::RieszOperators(const Problem& pb) : pb_(&pb) {
  const SpaceSet& s = pb.spaces();
  m_ = static_cast<int>(s.P.cols());
  np_ = s.pressure_dim() - 1;
  saddle_ = Factorization(saddle_matrix(pb, pb.A(), s.P), false);
}

Vector RieszOperators::velocity(const Vector& r) const {
  const SpaceSet& s = pb_->spaces();
  Vector rhs = Vector::Zero(m_ + np_);
  rhs.head(m_) = s.P.transpose() * r;
  Vector x = saddle_.solve(rhs);
  return s.P * x.head(m_);
}

Matrix RieszOperators::velocity(const Matrix& R) const {
  const SpaceSet& s = pb_->spaces();
  Matrix rhs = Matrix::Zero(m_ + np_, R.cols());
  rhs.topRows(m_) = s.P.transpose() * R;
  Matrix x = saddle_.solve(rhs);
  return s.P * x.topRows(m_);
}

Vector RieszOperators::rotation(const Vector& r) const {
  const SpaceSet& s = pb_->spaces();
  const auto& in = s.interior_nodes;
  Vector ri(in.size());
  for (size_t k = 0; k < in.size(); ++k) ri[k] = r[in[k]];
  Vector z = pb_->stream().interior_factorization().solve(ri);
  Vector out = Vector::Zero(s.n_nodes);
  for (size_t k = 0; k < in.size(); ++k) out[in[k]] = z[k];
  return out;
}

Matrix RieszOperators::rotation(const Matrix& R) const {
  const SpaceSet& s = pb_->spaces();
  const auto& in = s.interior_nodes;
  Matrix ri(in.size(), R.cols());
  for (size_t k = 0; k < in.size(); ++k) ri.row(k) = R.row(in[k]);
  Matrix z = pb_->stream().interior_factorization().solve(ri);
  Matrix out = Matrix::Zero(s.n_nodes, R.cols());
  for (size_t k = 0; k < in.size(); ++k) out.row(in[k]) = z.row(k);
  return out;
}

Vector velocity_trace_mismatch(const Problem& pb, const Vector& u, const Vector& g1) {
  const SpaceSet& s = pb.spaces();
  const int N = s.n_nodes;
  Vector data = pb.velocity_dirichlet(g1);
  Vector e = Vector::Zero(2 * N);
  for (int n : s.nonslip_nodes)
    for (int c = 0; c < 2; ++c) e[c * N + n] = u[c * N + n] - data[c * N + n];
  return e;
}

Vector rotation_trace_mismatch(const Problem& pb, const Vector& w, const Vector& g2) {
  const SpaceSet& s = pb.spaces();
  Vector data = pb.rotation_dirichlet(g2);
  Vector e = Vector::Zero(s.n_nodes);
  for (int n : s.boundary_nodes) e[n] = w[n] - data[n];
  return e;
}

PenaltyMultipliers compute_penalty_multipliers(const Problem& pb, const RieszOperators& riesz, const PenaltyPoint& x,
                                               double eps) {
  if (!(eps > 0.0)) throw InputError("penalty parameter eps must be positive");
  const SpaceSet& s = pb.spaces();
  const int N = s.n_nodes;
  Vector psi = pb.stream().apply(x.u);
  ResidualParts<double> r = evaluate_state_residual<double>(pb, x.u, Vector::Zero(s.pressure_dim()), x.w, psi);
  PenaltyMultipliers m;
  Vector y = riesz.velocity(r.mom);
  Vector z = riesz.rotation(r.rot);
  // Energy of the representatives; r.y cancels the O(1) pressure part only to roundoff.
  m.momentum2 = std::max(0.0, y.dot(pb.A() * y));
  m.rotation2 = std::max(0.0, z.dot(pb.stiffness() * z));
  Vector eu = velocity_trace_mismatch(pb, x.u, x.g1);
  Vector ew = rotation_trace_mismatch(pb, x.w, x.g2);
  m.trace_u2 = std::max(0.0, eu.dot(apply_trace_metric(pb.halfnorm(Segment::NonSlip), eu, N, 2)));
  m.trace_w2 = std::max(0.0, ew.dot(apply_trace_metric(pb.halfnorm(Segment::Whole), ew, N, 1)));
  const double inv = 1.0 / eps;
  m.lambda = inv * y;
  m.phi = inv * z;
  m.xi = inv * eu;
  m.theta = inv * ew;
  return m;
}

PenaltyValue evaluate_J_eps(const Problem& pb, const RieszOperators& riesz, const Targets& targets,
                            const PenaltyPoint& x, const PenaltyPoint& anchor, double eps) {
  PenaltyValue v;
  Vector psi = pb.stream().apply(x.u);
  v.J = evaluate_J(pb, targets, x.u, x.w, psi, x.g1, x.g2);
  v.anchor_terms = 0.5 * (anchor_h1(pb.vector_gram(), x.u - anchor.u) + anchor_h1(pb.gram(), x.w - anchor.w) +
                          pb.halfnorm(Segment::Gamma1).norm2_interleaved(x.g1 - anchor.g1) +
                          pb.halfnorm(Segment::Gamma3).norm2(x.g2 - anchor.g2));
  PenaltyMultipliers m = compute_penalty_multipliers(pb, riesz, x, eps);
  v.penalty = (0.5 / eps) * (m.momentum2 + m.rotation2 + m.trace_u2 + m.trace_w2);
  v.total = v.J.total + v.anchor_terms + v.penalty;
  return v;
}

PenaltyGradient penalty_gradient(const Problem& pb, const RieszOperators& riesz, const Targets& targets,
                                 const PenaltyPoint& x, const PenaltyPoint& anchor, double eps) {
  const SpaceSet& s = pb.spaces();
  const int N = s.n_nodes;
  const auto& beta = pb.params().beta;
  Vector psi = pb.stream().apply(x.u);
  PenaltyMultipliers m = compute_penalty_multipliers(pb, riesz, x, eps);
  StateJacobian J = linearize_state(pb, x.u, Vector::Zero(s.pressure_dim()), x.w, psi);
  StateGradient gj = objective_state_gradient(pb, targets, x.u, x.w, psi);

  Vector su = apply_trace_metric(pb.halfnorm(Segment::NonSlip), m.xi, N, 2);
  Vector sw = apply_trace_metric(pb.halfnorm(Segment::Whole), m.theta, N, 1);
  Vector psi_part = gj.dpsi + J.mom_psi.transpose() * m.lambda + J.rot_psi.transpose() * m.phi;

  PenaltyGradient g;
  g.du = gj.du + pb.stream().apply_transpose(psi_part) + pb.vector_gram() * (x.u - anchor.u) +
         J.mom_u.transpose() * m.lambda + J.rot_u.transpose() * m.phi + su;
  g.dw = gj.dw + pb.gram() * (x.w - anchor.w) + J.mom_w.transpose() * m.lambda + J.rot_w.transpose() * m.phi + sw;
  const auto& h1 = pb.halfnorm(Segment::Gamma1);
  const auto& h3 = pb.halfnorm(Segment::Gamma3);
  g.dg1 = beta[4] * h1.apply_interleaved(x.g1) + h1.apply_interleaved(x.g1 - anchor.g1);
  for (int k = 0; k < pb.n_control1(); ++k) {
    g.dg1[2 * k] -= su[s.control1_nodes[k]];
    g.dg1[2 * k + 1] -= su[N + s.control1_nodes[k]];
  }
  g.dg2 = beta[5] * (h3.S * x.g2) + h3.S * (x.g2 - anchor.g2);
  for (int k = 0; k < pb.n_control3(); ++k) g.dg2[k] -= sw[s.control3_nodes[k]];
  return g;
}

}  // namespace mpoc
