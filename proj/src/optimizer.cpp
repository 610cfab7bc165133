#include "mpoc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mpoc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector clamp(const Vector& x, const Vector& lo, const Vector& hi) { return x.cwiseMax(lo).cwiseMin(hi); }

// argmin 1/2 (x-y)^T M (x-y) over lo <= x <= hi, a^T x = b with M = diag(m).
Vector project_flux_box(const Vector& y, const Vector& m, const Vector& a, double b, const Vector& lo,
                        const Vector& hi) {
  const Eigen::Index n = y.size();
  if (n == 0) return y;
  double amax = 0.0, amin = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    amax += std::max(a[i] * lo[i], a[i] * hi[i]);
    amin += std::min(a[i] * lo[i], a[i] * hi[i]);
  }
  const double scale = std::max({std::abs(amax), std::abs(amin), std::abs(b), 1e-300});
  if (b > amax + 1e-12 * scale || b < amin - 1e-12 * scale)
    throw InputError("control set empty for required flux");
  const Vector dir = a.cwiseQuotient(m);
  auto x_of = [&](double t) { return clamp(y + t * dir, lo, hi); };
  auto phi = [&](double t) { return a.dot(x_of(t)) - b; };
  Vector x0 = x_of(0.0);
  if (std::abs(a.dot(x0) - b) <= 1e-14 * scale) return x0;
  double tl = 0.0, th = 0.0;
  double T = 1.0;
  if (phi(0.0) < 0.0) {
    while (phi(T) < 0.0 && T < 1e300) T *= 2.0;
    tl = 0.0;
    th = T;
  } else {
    while (phi(-T) > 0.0 && T < 1e300) T *= 2.0;
    tl = -T;
    th = 0.0;
  }
  for (int it = 0; it < 200 && th - tl > 1e-15 * std::max(1.0, std::abs(th)); ++it) {
    const double tm = 0.5 * (tl + th);
    if (phi(tm) < 0.0)
      tl = tm;
    else
      th = tm;
  }
  // Exact t on the free set of the bracket midpoint.
  const double tm = 0.5 * (tl + th);
  Vector x = x_of(tm);
  double fixed = 0.0, ay = 0.0, ad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = y[i] + tm * dir[i];
    if (v > lo[i] && v < hi[i]) {
      ay += a[i] * y[i];
      ad += a[i] * dir[i];
    } else {
      fixed += a[i] * x[i];
    }
  }
  if (ad > 0.0) {
    const double t = (b - fixed - ay) / ad;
    Vector xt = x;
    bool consistent = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = y[i] + tm * dir[i];
      if (v > lo[i] && v < hi[i]) {
        xt[i] = y[i] + t * dir[i];
        if (xt[i] < lo[i] - 1e-12 * (1 + std::abs(lo[i])) || xt[i] > hi[i] + 1e-12 * (1 + std::abs(hi[i])))
          consistent = false;
      }
    }
    if (consistent) x = clamp(xt, lo, hi);
  }
  return x;
}

// Dense metric for interleaved vector traces.
Matrix interleaved_metric(const Matrix& S) {
  const Eigen::Index n = S.rows();
  Matrix H = Matrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      H(2 * i, 2 * j) = S(i, j);
      H(2 * i + 1, 2 * j + 1) = S(i, j);
    }
  return H;
}

// argmin 1/2 (x-z)^T H (x-z) over the box and a^T x = b, by bisection on the flux multiplier
// followed by an exact solve on the free set.
Vector project_h_metric(const Matrix& H, const Vector& z, const Vector* a, double b, const Vector& lo,
                        const Vector& hi) {
  const Vector Hz = H * z;
  if (!a) return box_qp(H, -Hz, lo, hi).x;
  auto x_of = [&](double nu) { return box_qp(H, Vector(-Hz + nu * (*a)), lo, hi).x; };
  auto phi = [&](double nu) { return a->dot(x_of(nu)) - b; };
  double amax = 0.0, amin = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    amax += std::max((*a)[i] * lo[i], (*a)[i] * hi[i]);
    amin += std::min((*a)[i] * lo[i], (*a)[i] * hi[i]);
  }
  const double scale = std::max({std::abs(amax), std::abs(amin), std::abs(b), 1e-300});
  if (b > amax + 1e-12 * scale || b < amin - 1e-12 * scale)
    throw InputError("control set empty for required flux");
  // phi is nonincreasing in nu.
  double lo_nu = -1.0, hi_nu = 1.0;
  while (phi(lo_nu) < 0.0 && lo_nu > -1e300) lo_nu *= 2.0;
  while (phi(hi_nu) > 0.0 && hi_nu < 1e300) hi_nu *= 2.0;
  for (int it = 0; it < 200 && hi_nu - lo_nu > 1e-15 * std::max(1.0, std::abs(hi_nu)); ++it) {
    const double m = 0.5 * (lo_nu + hi_nu);
    if (phi(m) > 0.0)
      lo_nu = m;
    else
      hi_nu = m;
  }
  const double nu0 = 0.5 * (lo_nu + hi_nu);
  Vector x = x_of(nu0);
  std::vector<int> free;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] > lo[i] && x[i] < hi[i]) free.push_back(static_cast<int>(i));
  const int nf = static_cast<int>(free.size());
  if (nf == 0) return x;
  Matrix K = Matrix::Zero(nf + 1, nf + 1);
  Vector r(nf + 1);
  double fixed_flux = 0.0;
  std::vector<char> is_free(x.size(), 0);
  for (int i : free) is_free[i] = 1;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!is_free[i]) fixed_flux += (*a)[i] * x[i];
  for (int p = 0; p < nf; ++p) {
    const int i = free[p];
    double rhs = Hz[i];
    for (Eigen::Index j = 0; j < x.size(); ++j)
      if (!is_free[j]) rhs -= H(i, j) * x[j];
    r[p] = rhs;
    for (int q = 0; q < nf; ++q) K(p, q) = H(i, free[q]);
    K(p, nf) = (*a)[i];
    K(nf, p) = (*a)[i];
  }
  r[nf] = b - fixed_flux;
  if (K.col(nf).head(nf).norm() == 0.0) return x;
  Vector sol = K.fullPivLu().solve(r);
  Vector xt = x;
  for (int p = 0; p < nf; ++p) xt[free[p]] = sol[p];
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (xt[i] < lo[i] - 1e-10 || xt[i] > hi[i] + 1e-10) return x;
  return clamp(xt, lo, hi);
}

Vector stacked(const Vector& a, const Vector& b) {
  Vector v(a.size() + b.size());
  v << a, b;
  return v;
}

ControlPair with_values(const ControlPair& c, const Vector& g1, const Vector& g2) {
  ControlPair out = c;
  out.g1 = g1;
  out.g2 = g2;
  return out;
}

}  // namespace

ReducedGradient reduced_gradient(const Problem& pb, const AdjointSolution& adj, const ControlPair& controls) {
  const SpaceSet& s = pb.spaces();
  const auto& beta = pb.params().beta;
  const int N = s.n_nodes;
  const auto& h1 = pb.halfnorm(Segment::Gamma1);
  const auto& h3 = pb.halfnorm(Segment::Gamma3);
  ReducedGradient g;
  Vector xi1(2 * pb.n_control1()), th3(pb.n_control3());
  for (int k = 0; k < pb.n_control1(); ++k) {
    xi1[2 * k] = adj.xi_full[s.control1_nodes[k]];
    xi1[2 * k + 1] = adj.xi_full[N + s.control1_nodes[k]];
  }
  for (int k = 0; k < pb.n_control3(); ++k) th3[k] = adj.theta_full[s.control3_nodes[k]];
  g.d1 = beta[4] * h1.apply_interleaved(controls.g1) - xi1;
  g.d2 = beta[5] * (h3.S * controls.g2) - th3;
  g.rep1 = g.d1.size() ? h1.solve_interleaved(g.d1) : g.d1;
  g.rep2 = g.d2.size() ? h3.solve(g.d2) : g.d2;
  return g;
}

ControlPair project_controls(const Problem& pb, const ControlPair& raw) {
  ControlPair out = raw;
  out.g1 = project_flux_box(raw.g1, pb.lumped_mass1(), pb.flux_functional(), raw.flux_target, raw.g1_lower,
                            raw.g1_upper);
  out.g2 = clamp(raw.g2, raw.g2_lower, raw.g2_upper);
  return out;
}

bool controls_feasible(const Problem& pb, const ControlPair& c, double tol) {
  for (Eigen::Index i = 0; i < c.g1.size(); ++i)
    if (c.g1[i] < c.g1_lower[i] - tol || c.g1[i] > c.g1_upper[i] + tol) return false;
  for (Eigen::Index i = 0; i < c.g2.size(); ++i)
    if (c.g2[i] < c.g2_lower[i] - tol || c.g2[i] > c.g2_upper[i] + tol) return false;
  const double flux = pb.flux_functional().dot(c.g1);
  return std::abs(flux - c.flux_target) <= tol * std::max(1.0, std::abs(c.flux_target));
}

Vector project_s_metric_g1(const Problem& pb, const ControlPair& c, const Vector& z) {
  if (z.size() > 200) return Vector::Constant(z.size(), kNaN);
  Matrix H = interleaved_metric(pb.halfnorm(Segment::Gamma1).S);
  return project_h_metric(H, z, &pb.flux_functional(), c.flux_target, c.g1_lower, c.g1_upper);
}

Vector project_s_metric_g2(const Problem& pb, const ControlPair& c, const Vector& z) {
  if (z.size() > 200) return Vector::Constant(z.size(), kNaN);
  return project_h_metric(pb.halfnorm(Segment::Gamma3).S, z, nullptr, 0.0, c.g2_lower, c.g2_upper);
}

ReducedEvaluation evaluate_reduced(const Problem& pb, const Targets& targets, const ControlPair& controls,
                                   const SolverOptions& sopts) {
  ReducedEvaluation ev;
  try {
    ev.state = solve_state(pb, controls, sopts);
  } catch (const NumericalError&) {
    return ev;
  }
  if (!ev.state.converged) return ev;
  ev.J = evaluate_J(pb, targets, ev.state, controls);
  ev.ok = std::isfinite(ev.J.total);
  return ev;
}

double projected_gradient_norm(const Problem& pb, const ControlPair& controls, const ReducedGradient& grad) {
  ControlPair trial = with_values(controls, controls.g1 - grad.d1.cwiseQuotient(pb.lumped_mass1()),
                                  controls.g2 - grad.d2.cwiseQuotient(pb.lumped_mass3()));
  ControlPair p = project_controls(pb, trial);
  Vector e1 = controls.g1 - p.g1, e2 = controls.g2 - p.g2;
  return std::sqrt(e1.dot(pb.lumped_mass1().cwiseProduct(e1)) + e2.dot(pb.lumped_mass3().cwiseProduct(e2)));
}

Certificate optimality_certificate(const Problem& pb, const ControlPair& controls, const AdjointSolution& adj,
                                   const ReducedGradient& grad, int competitors, std::uint64_t seed) {
  const auto& beta = pb.params().beta;
  Certificate c;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  c.vi_min1 = std::numeric_limits<double>::infinity();
  c.vi_min2 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < competitors; ++k) {
    ControlPair r = controls;
    for (Eigen::Index i = 0; i < r.g1.size(); ++i)
      r.g1[i] = controls.g1_lower[i] + uni(rng) * (controls.g1_upper[i] - controls.g1_lower[i]);
    for (Eigen::Index i = 0; i < r.g2.size(); ++i)
      r.g2[i] = controls.g2_lower[i] + uni(rng) * (controls.g2_upper[i] - controls.g2_lower[i]);
    r = project_controls(pb, r);
    c.vi_min1 = std::min(c.vi_min1, grad.d1.dot(r.g1 - controls.g1));
    c.vi_min2 = std::min(c.vi_min2, grad.d2.dot(r.g2 - controls.g2));
  }
  if (competitors <= 0) c.vi_min1 = c.vi_min2 = 0.0;

  const SpaceSet& s = pb.spaces();
  const int N = s.n_nodes;
  const auto& h1 = pb.halfnorm(Segment::Gamma1);
  const auto& h3 = pb.halfnorm(Segment::Gamma3);
  Vector xi1(2 * pb.n_control1()), th3(pb.n_control3());
  for (int k = 0; k < pb.n_control1(); ++k) {
    xi1[2 * k] = adj.xi_full[s.control1_nodes[k]];
    xi1[2 * k + 1] = adj.xi_full[N + s.control1_nodes[k]];
  }
  for (int k = 0; k < pb.n_control3(); ++k) th3[k] = adj.theta_full[s.control3_nodes[k]];
  Vector z1 = h1.solve_interleaved(xi1) / beta[4];
  Vector z2 = h3.solve(th3) / beta[5];
  Vector p1 = project_s_metric_g1(pb, controls, z1);
  Vector p2 = project_s_metric_g2(pb, controls, z2);
  c.projection_dist1 = p1.allFinite() ? std::sqrt(std::max(0.0, h1.norm2_interleaved(controls.g1 - p1))) : kNaN;
  c.projection_dist2 = p2.allFinite() ? std::sqrt(std::max(0.0, h3.norm2(controls.g2 - p2))) : kNaN;
  return c;
}

OptimizationResult optimize(const Problem& pb, const Targets& targets, const ControlPair& init,
                            const OptimizerOptions& opts) {
  const auto& beta = pb.params().beta;
  if (!(beta[4] > 0.0) || !(beta[5] > 0.0))
    throw InputError("optimizer requires beta5 > 0 and beta6 > 0 (control-cost weights)");
  if (!(opts.shrink > 0.0 && opts.shrink < 1.0) || !(opts.step0 > 0.0) || opts.max_outer < 0)
    throw InputError("invalid optimizer options");
  const Vector m = stacked(pb.lumped_mass1(), pb.lumped_mass3());
  const Eigen::Index n1 = init.g1.size();

  OptimizationResult res;
  res.controls = project_controls(pb, init);
  ReducedEvaluation cur = evaluate_reduced(pb, targets, res.controls, opts.state);
  if (!cur.ok) throw NumericalError("state solver failed at the initial controls: " + cur.state.reason);

  Vector prev_x, prev_d;
  double last_step = opts.step0;
  for (int it = 0;; ++it) {
    AdjointSolution adj = solve_adjoint(pb, cur.state, targets);
    ReducedGradient grad = reduced_gradient(pb, adj, res.controls);
    const double pg = projected_gradient_norm(pb, res.controls, grad);
    Certificate cert = optimality_certificate(pb, res.controls, adj, grad, opts.competitors, opts.seed);
    IterationRecord rec;
    rec.iteration = it;
    rec.J = cur.J;
    rec.pg_norm = pg;
    rec.vi_residual = std::min(cert.vi_min1, cert.vi_min2);
    rec.projection_distance = cert.projection_dist1;
    rec.step = it == 0 ? 0.0 : last_step;
    res.history.push_back(rec);
    res.state = cur.state;
    res.adjoint = adj;
    res.certificate = cert;
    if (pg <= opts.tol_vi) {
      res.converged = true;
      res.reason = "projected gradient below tolerance";
      break;
    }
    if (it >= opts.max_outer) {
      res.reason = "maximum outer iterations reached";
      break;
    }

    const Vector x = stacked(res.controls.g1, res.controls.g2);
    const Vector d = stacked(grad.d1, grad.d2);
    double t = opts.step0;
    if (prev_x.size()) {
      const Vector sx = x - prev_x, yd = d - prev_d;
      const double num = sx.dot(m.cwiseProduct(sx)), den = sx.dot(yd);
      if (den > 0.0 && std::isfinite(num / den)) t = std::clamp(num / den, 1e-10, 1e10);
    }
    const Vector dir = d.cwiseQuotient(m);
    bool accepted = false, state_failed = false;
    ReducedEvaluation next;
    ControlPair trial;
    while (t >= 1e-12) {
      const Vector y = x - t * dir;
      trial = project_controls(pb, with_values(res.controls, y.head(n1), y.tail(y.size() - n1)));
      const Vector xt = stacked(trial.g1, trial.g2);
      const double decrease = d.dot(xt - x);
      if (decrease >= 0.0) {
        t *= opts.shrink;
        continue;
      }
      next = evaluate_reduced(pb, targets, trial, opts.state);
      if (!next.ok) {
        state_failed = true;
        t *= opts.shrink;
        continue;
      }
      if (next.J.total <= cur.J.total + opts.armijo * decrease) {
        accepted = true;
        break;
      }
      t *= opts.shrink;
    }
    if (!accepted) {
      res.reason = state_failed ? "state solver limited" : "line search stalled";
      break;
    }
    prev_x = x;
    prev_d = d;
    last_step = t;
    res.controls = trial;
    cur = std::move(next);
  }
  return res;
}

std::vector<GradientCheckRow> gradient_check(const Problem& pb, const Targets& targets, const ControlPair& controls,
                                             int directions, std::uint64_t seed, double h,
                                             const SolverOptions& sopts) {
  ReducedEvaluation base = evaluate_reduced(pb, targets, controls, sopts);
  if (!base.ok) throw NumericalError("state solver failed at the gradient-check point: " + base.state.reason);
  AdjointSolution adj = solve_adjoint(pb, base.state, targets);
  ReducedGradient grad = reduced_gradient(pb, adj, controls);
  const Vector& a = pb.flux_functional();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto j_at = [&](const Vector& d1, const Vector& d2, double step) {
    ControlPair c = with_values(controls, controls.g1 + step * d1, controls.g2 + step * d2);
    ReducedEvaluation ev = evaluate_reduced(pb, targets, c, sopts);
    if (!ev.ok) throw NumericalError("state solver failed during the gradient check: " + ev.state.reason);
    return ev.J.total;
  };
  std::vector<GradientCheckRow> rows;
  for (int k = 0; k < directions; ++k) {
    Vector d1(controls.g1.size()), d2(controls.g2.size());
    for (Eigen::Index i = 0; i < d1.size(); ++i) d1[i] = nd(rng);
    for (Eigen::Index i = 0; i < d2.size(); ++i) d2[i] = nd(rng);
    if (a.squaredNorm() > 0.0) d1 -= (a.dot(d1) / a.squaredNorm()) * a;
    const double nrm = std::sqrt(d1.squaredNorm() + d2.squaredNorm());
    d1 /= nrm;
    d2 /= nrm;
    auto central = [&](double hh) { return (j_at(d1, d2, hh) - j_at(d1, d2, -hh)) / (2.0 * hh); };
    GradientCheckRow row;
    row.finite_difference = (4.0 * central(0.5 * h) - central(h)) / 3.0;
    row.adjoint = grad.d1.dot(d1) + grad.d2.dot(d2);
    const double denom = std::max(std::abs(row.adjoint), std::abs(row.finite_difference));
    row.rel_error = denom > 0.0 ? std::abs(row.adjoint - row.finite_difference) / denom : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mpoc
