#include "mpoc/problem.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace mpoc {

void ModelParams::validate() const {
  auto fail = [](const std::string& m) { throw InputError(m); };
  if (!(mu1 > 0.0)) fail("mu1 must be positive");
  if (!(mu2 > 0.0)) fail("mu2 must be positive");
  if (!(mur >= 0.0)) fail("mur must be nonnegative");
  if (!(alpha >= 0.0)) fail("alpha must be nonnegative");
  bool any = false;
  for (int i = 0; i < 6; ++i) {
    if (!(beta[i] >= 0.0)) fail("beta" + std::to_string(i + 1) + " must be nonnegative");
    any = any || beta[i] > 0.0;
  }
  if (!any) fail("objective weights beta1..beta6 are all zero");
}

Targets Targets::zero(const SpaceSet& s) {
  Targets t;
  const size_t n = s.quad.size();
  t.ux.assign(n, 0.0);
  t.uy.assign(n, 0.0);
  t.w.assign(n, 0.0);
  t.rho.assign(n, 0.0);
  return t;
}

Targets Targets::from_functions(const SpaceSet& s, const VectorField& u_d, const ScalarField& w_d,
                                const ScalarField& rho_d) {
  Targets t = zero(s);
  for (size_t k = 0; k < s.quad.size(); ++k) {
    const Vec2& x = s.quad[k].x;
    if (u_d) {
      Vec2 v = u_d(x);
      t.ux[k] = v.x();
      t.uy[k] = v.y();
    }
    if (w_d) t.w[k] = w_d(x);
    if (rho_d) t.rho[k] = rho_d(x);
  }
  return t;
}

double HalfNormOperator::norm2_interleaved(const Vector& trace) const {
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  Vector x(n), y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x[k] = trace[2 * k];
    y[k] = trace[2 * k + 1];
  }
  return x.dot(S * x) + y.dot(S * y);
}

Vector HalfNormOperator::apply_interleaved(const Vector& trace) const {
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  Vector x(n), y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x[k] = trace[2 * k];
    y[k] = trace[2 * k + 1];
  }
  Vector sx = S * x, sy = S * y, out(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out[2 * k] = sx[k];
    out[2 * k + 1] = sy[k];
  }
  return out;
}

Vector HalfNormOperator::solve_interleaved(const Vector& rhs) const {
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  Vector x(n), y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x[k] = rhs[2 * k];
    y[k] = rhs[2 * k + 1];
  }
  Vector sx = chol.solve(x), sy = chol.solve(y), out(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out[2 * k] = sx[k];
    out[2 * k + 1] = sy[k];
  }
  return out;
}

HalfNormOperator build_halfnorm(const SpaceSet& s, const SparseMatrix& gram, Segment segment) {
  HalfNormOperator h;
  std::vector<int> eliminated = s.interior_nodes;
  switch (segment) {
    case Segment::Gamma1:
      h.nodes = s.control1_nodes;
      break;
    case Segment::Gamma3:
      h.nodes = s.control3_nodes;
      break;
    case Segment::NonSlip:
      h.nodes = s.nonslip_nodes;
      for (int n : s.boundary_nodes)
        if (!s.on_nonslip[n]) eliminated.push_back(n);
      break;
    case Segment::Whole:
      h.nodes = s.boundary_nodes;
      break;
  }
  if (h.nodes.empty()) {
    h.S = Matrix(0, 0);
  } else {
    h.S = schur_complement(gram, h.nodes, eliminated);
  }
  h.chol.compute(h.S);
  if (!h.nodes.empty() && h.chol.info() != Eigen::Success)
    throw NumericalError("extension-norm matrix is not positive definite");
  return h;
}

Problem::Problem(const Mesh& mesh, ModelParams params) : params_(std::move(params)) {
  params_.validate();
  if (!params_.u0 || !params_.w0 || !params_.rho0) throw InputError("boundary data u0, w0 and rho0 are required");
  spaces_ = std::make_unique<SpaceSet>(build_spaces(mesh));
  const SpaceSet& s = *spaces_;
  stream_ = std::make_unique<StreamOperator>(s);
  const int N = s.n_nodes;

  A_ = assemble_A(s, params_.alpha);
  K_ = stream_->stiffness();
  M_ = assemble_mass(s);
  Mv_ = assemble_vector_mass(s);
  G_ = assemble_gram(s);
  Gv_ = assemble_vector_gram(s);
  D_ = assemble_divergence(s);
  Rw_ = assemble_rot_coupling(s);
  Ru_ = stream_->rot_u();
  RR_ = assemble_rotrot(s);

  fx_.assign(s.quad.size(), 0.0);
  fy_.assign(s.quad.size(), 0.0);
  g_.assign(s.quad.size(), 0.0);
  for (size_t k = 0; k < s.quad.size(); ++k) {
    if (params_.f) {
      Vec2 v = params_.f(s.quad[k].x);
      fx_[k] = v.x();
      fy_[k] = v.y();
    }
    if (params_.g) g_[k] = params_.g(s.quad[k].x);
  }

  for (int seg = 0; seg < 4; ++seg) halfnorms_[seg] = build_halfnorm(s, G_, static_cast<Segment>(seg));

  u_gamma0_ = Vector::Zero(2 * N);
  w_gamma0_ = Vector::Zero(N);
  for (int n = 0; n < N; ++n) {
    if (s.vel_kind[n] == VelocityNodeKind::Gamma0) {
      Vec2 v = params_.u0(s.nodes[n], s.arclength[n]);
      u_gamma0_[n] = v.x();
      u_gamma0_[N + n] = v.y();
    }
    if (s.rot_kind[n] == RotationNodeKind::Gamma0) w_gamma0_[n] = params_.w0(s.nodes[n], s.arclength[n]);
  }

  // Profile eta from the Γ0 trace of psi, which depends on u0 only.
  Vector psi_b = stream_->boundary_operator() * u_gamma0_;
  std::vector<double> psi_s, rho_s;
  for (int n : s.gamma0_nodes) {
    psi_s.push_back(psi_b[n]);
    rho_s.push_back(params_.rho0(s.nodes[n], s.arclength[n]));
  }
  profile_ = build_eta(psi_s, rho_s);

  std::unordered_map<int, int> c1, c3;
  for (size_t k = 0; k < s.control1_nodes.size(); ++k) c1[s.control1_nodes[k]] = static_cast<int>(k);
  for (size_t k = 0; k < s.control3_nodes.size(); ++k) c3[s.control3_nodes[k]] = static_cast<int>(k);
  flux_a_ = Vector::Zero(2 * s.control1_nodes.size());
  lumped1_ = Vector::Zero(2 * s.control1_nodes.size());
  lumped3_ = Vector::Zero(s.control3_nodes.size());
  for (const auto& seg : s.boundary) {
    for (int k = 0; k < 3; ++k) {
      const double w = seg.length * (k == 1 ? 2.0 / 3.0 : 1.0 / 6.0);
      const int n = seg.nodes[k];
      if (seg.vtag == VelocityTag::G1) {
        auto it = c1.find(n);
        if (it != c1.end()) {
          flux_a_[2 * it->second] += w * seg.normal.x();
          flux_a_[2 * it->second + 1] += w * seg.normal.y();
          lumped1_[2 * it->second] += w;
          lumped1_[2 * it->second + 1] += w;
        }
      }
      if (seg.rtag == RotationTag::G3) {
        auto it = c3.find(n);
        if (it != c3.end()) lumped3_[it->second] += w;
      }
    }
  }
  flux_target_ = -stream_->boundary_flux(u_gamma0_);
}

Vector Problem::velocity_dirichlet(const Vector& g1) const {
  const SpaceSet& s = *spaces_;
  if (g1.size() != 2 * n_control1()) throw InputError("g1 has the wrong length");
  Vector u = u_gamma0_;
  for (int k = 0; k < n_control1(); ++k) {
    const int n = s.control1_nodes[k];
    u[n] = g1[2 * k];
    u[s.n_nodes + n] = g1[2 * k + 1];
  }
  return u;
}

Vector Problem::rotation_dirichlet(const Vector& g2) const {
  const SpaceSet& s = *spaces_;
  if (g2.size() != n_control3()) throw InputError("g2 has the wrong length");
  Vector w = w_gamma0_;
  for (int k = 0; k < n_control3(); ++k) w[s.control3_nodes[k]] = g2[k];
  return w;
}

Vector Problem::extract_g1(const Vector& u) const {
  const SpaceSet& s = *spaces_;
  Vector g(2 * n_control1());
  for (int k = 0; k < n_control1(); ++k) {
    g[2 * k] = u[s.control1_nodes[k]];
    g[2 * k + 1] = u[s.n_nodes + s.control1_nodes[k]];
  }
  return g;
}

Vector Problem::extract_g2(const Vector& w) const {
  const SpaceSet& s = *spaces_;
  Vector g(n_control3());
  for (int k = 0; k < n_control3(); ++k) g[k] = w[s.control3_nodes[k]];
  return g;
}

ControlPair Problem::make_controls(const VectorField& g1, const ScalarField& g2, double g1_lo, double g1_hi,
                                   double g2_lo, double g2_hi) const {
  if (!(g1_lo <= g1_hi) || !(g2_lo <= g2_hi)) throw InputError("control bounds are inverted");
  const SpaceSet& s = *spaces_;
  ControlPair c;
  c.g1 = Vector::Zero(2 * n_control1());
  c.g2 = Vector::Zero(n_control3());
  for (int k = 0; k < n_control1(); ++k) {
    if (!g1) break;
    Vec2 v = g1(s.nodes[s.control1_nodes[k]]);
    c.g1[2 * k] = v.x();
    c.g1[2 * k + 1] = v.y();
  }
  for (int k = 0; k < n_control3(); ++k)
    if (g2) c.g2[k] = g2(s.nodes[s.control3_nodes[k]]);
  c.g1_lower = Vector::Constant(c.g1.size(), g1_lo);
  c.g1_upper = Vector::Constant(c.g1.size(), g1_hi);
  c.g2_lower = Vector::Constant(c.g2.size(), g2_lo);
  c.g2_upper = Vector::Constant(c.g2.size(), g2_hi);
  c.flux_target = flux_target_;
  return c;
}

ControlPair Problem::zero_controls(double bound) const { return make_controls({}, {}, -bound, bound, -bound, bound); }

double Problem::poincare_constant() const {
  if (poincare_ < 0.0) {
    const auto& in = spaces_->interior_nodes;
    if (in.empty()) {
      poincare_ = 0.0;
    } else {
      double lam = smallest_generalized_eigenvalue(submatrix(K_, in, in), submatrix(M_, in, in));
      poincare_ = 1.0 / std::sqrt(lam);
    }
  }
  return poincare_;
}

}  // namespace mpoc
