#include "mpoc/objective.hpp"

namespace mpoc {

ObjectiveBreakdown evaluate_J(const Problem& pb, const Targets& targets, const Vector& u, const Vector& w,
                              const Vector& psi, const Vector& g1, const Vector& g2) {
  const SpaceSet& s = pb.spaces();
  const auto& beta = pb.params().beta;
  QuadField ux, uy;
  vector_at_quad(s, u, ux, uy);
  QuadField wq = scalar_at_quad(s, w);
  QuadField pq = scalar_at_quad(s, psi);
  double du = 0.0, dw = 0.0, dr = 0.0;
  for (size_t k = 0; k < s.quad.size(); ++k) {
    const double wt = s.quad[k].w;
    const double ex = ux[k] - targets.ux[k], ey = uy[k] - targets.uy[k];
    du += wt * (ex * ex + ey * ey);
    const double ew = wq[k] - targets.w[k];
    dw += wt * ew * ew;
    const double er = pb.profile().eval(pq[k]) - targets.rho[k];
    dr += wt * er * er;
  }
  ObjectiveBreakdown b;
  b.terms[0] = 0.5 * beta[0] * std::max(0.0, u.dot(pb.rotrot() * u));
  b.terms[1] = 0.5 * beta[1] * du;
  b.terms[2] = 0.5 * beta[2] * dw;
  b.terms[3] = 0.5 * beta[3] * dr;
  b.terms[4] = 0.5 * beta[4] * std::max(0.0, pb.halfnorm(Segment::Gamma1).norm2_interleaved(g1));
  b.terms[5] = 0.5 * beta[5] * std::max(0.0, pb.halfnorm(Segment::Gamma3).norm2(g2));
  for (double t : b.terms) b.total += t;
  return b;
}

ObjectiveBreakdown evaluate_J(const Problem& pb, const Targets& targets, const StateSolution& state,
                              const ControlPair& controls) {
  return evaluate_J(pb, targets, state.u, state.w, state.psi, controls.g1, controls.g2);
}

StateGradient objective_state_gradient(const Problem& pb, const Targets& targets, const Vector& u, const Vector& w,
                                       const Vector& psi) {
  const SpaceSet& s = pb.spaces();
  const auto& beta = pb.params().beta;
  StateGradient g;
  g.du = beta[0] * (pb.rotrot() * u) +
         beta[1] * (pb.vector_mass() * u - assemble_load(s, nullptr, targets.ux, targets.uy));
  g.dw = beta[2] * (pb.mass() * w - assemble_scalar_load(s, nullptr, targets.w));
  QuadField pq = scalar_at_quad(s, psi);
  QuadField q(pq.size());
  for (size_t k = 0; k < pq.size(); ++k)
    q[k] = beta[3] * (pb.profile().eval(pq[k]) - targets.rho[k]) * pb.profile().derivative(pq[k]);
  g.dpsi = assemble_scalar_load(s, nullptr, q);
  return g;
}

Targets targets_from_state(const Problem& pb, const StateSolution& state) {
  const SpaceSet& s = pb.spaces();
  Targets t;
  vector_at_quad(s, state.u, t.ux, t.uy);
  t.w = scalar_at_quad(s, state.w);
  QuadField pq = scalar_at_quad(s, state.psi);
  t.rho.resize(pq.size());
  for (size_t k = 0; k < pq.size(); ++k) t.rho[k] = pb.profile().eval(pq[k]);
  return t;
}

}  // namespace mpoc
