#include "mpoc/forms.hpp"

#include "mpoc/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <thread>

namespace mpoc {

namespace {

std::atomic<int> g_threads{1};

// Runs kernel(cell, triplets) over all cells, possibly in parallel, and concatenates the
// per-chunk triplet lists in cell order.
template <class Kernel>
SparseMatrix assemble_cells(const SpaceSet& s, int rows, int cols, Kernel&& kernel) {
  const int nc = s.cells();
  const int nt = std::max(1, std::min(g_threads.load(), nc));
  std::vector<std::vector<Triplet>> parts(nt);
  auto run = [&](int part) {
    int begin = static_cast<int>(static_cast<long long>(nc) * part / nt);
    int end = static_cast<int>(static_cast<long long>(nc) * (part + 1) / nt);
    for (int t = begin; t < end; ++t) kernel(t, parts[part]);
  };
  if (nt == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int p = 0; p < nt; ++p) pool.emplace_back(run, p);
    for (auto& th : pool) th.join();
  }
  std::vector<Triplet> all;
  size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return make_sparse(rows, cols, all);
}

struct LocalField {
  std::array<double, 6> c{};
  double value(const QuadPoint& qp) const {
    double v = 0;
    for (int a = 0; a < 6; ++a) v += qp.phi[a] * c[a];
    return v;
  }
  Vec2 grad(const QuadPoint& qp) const {
    Vec2 g = Vec2::Zero();
    for (int a = 0; a < 6; ++a) g += qp.grad[a] * c[a];
    return g;
  }
};

LocalField gather(const SpaceSet& s, const Vector& v, int t, int offset = 0) {
  LocalField f;
  for (int a = 0; a < 6; ++a) f.c[a] = v[offset + s.cell_nodes[t][a]];
  return f;
}

const QuadPoint& qpt(const SpaceSet& s, int t, int q) { return s.quad[static_cast<size_t>(t) * kQuadPoints + q]; }

SparseMatrix scalar_kernel_matrix(const SpaceSet& s, bool stiffness, bool mass) {
  const int N = s.n_nodes;
  return assemble_cells(s, N, N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = qpt(s, t, q);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          double v = 0;
          if (stiffness) v += qp.grad[i].dot(qp.grad[j]);
          if (mass) v += qp.phi[i] * qp.phi[j];
          out.emplace_back(cn[i], cn[j], qp.w * v);
        }
    }
  });
}

SparseMatrix blockdiag2(const SparseMatrix& M) {
  const int N = static_cast<int>(M.rows());
  std::vector<Triplet> trip;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) {
      trip.emplace_back(it.row(), it.col(), it.value());
      trip.emplace_back(N + it.row(), N + it.col(), it.value());
    }
  return make_sparse(2 * N, 2 * N, trip);
}

}  // namespace

void set_assembly_threads(int n) { g_threads = std::max(1, n); }
int assembly_threads() { return g_threads.load(); }

SparseMatrix assemble_slip_mass(const SpaceSet& s) {
  const int N = s.n_nodes;
  std::vector<Triplet> trip;
  for (const auto& seg : s.boundary) {
    if (seg.vtag != VelocityTag::G2) continue;
    for (int q = 0; q < kEdgeQuadPoints; ++q) {
      auto b = edge_basis(kEdgeQuadPoints01[q]);
      double w = kEdgeQuadWeights[q] * seg.length;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int c = 0; c < 2; ++c) trip.emplace_back(c * N + seg.nodes[i], c * N + seg.nodes[j], w * b[i] * b[j]);
    }
  }
  return make_sparse(2 * N, 2 * N, trip);
}

SparseMatrix assemble_A(const SpaceSet& s, double alpha) {
  const int N = s.n_nodes;
  SparseMatrix A = assemble_cells(s, 2 * N, 2 * N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = qpt(s, t, q);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          const double gg = qp.grad[i].dot(qp.grad[j]);
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) {
              double v = (c == d ? gg : 0.0) + qp.grad[j][c] * qp.grad[i][d];
              out.emplace_back(c * N + cn[i], d * N + cn[j], qp.w * v);
            }
        }
    }
  });
  if (alpha != 0.0) A += (2.0 * alpha) * assemble_slip_mass(s);
  return A;
}

SparseMatrix assemble_Atilde(const SpaceSet& s) { return scalar_kernel_matrix(s, true, false); }
SparseMatrix assemble_mass(const SpaceSet& s) { return scalar_kernel_matrix(s, false, true); }
SparseMatrix assemble_vector_mass(const SpaceSet& s) { return blockdiag2(assemble_mass(s)); }
SparseMatrix assemble_gram(const SpaceSet& s) { return scalar_kernel_matrix(s, true, true); }
SparseMatrix assemble_vector_gram(const SpaceSet& s) { return blockdiag2(assemble_gram(s)); }

SparseMatrix assemble_convection(const SpaceSet& s, const QuadField& rho, const Vector& a) {
  const int N = s.n_nodes;
  return assemble_cells(s, N, N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    LocalField ax = gather(s, a, t), ay = gather(s, a, t, N);
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = qpt(s, t, q);
      const double r = rho[t * kQuadPoints + q] * qp.w;
      const Vec2 av(ax.value(qp), ay.value(qp));
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) out.emplace_back(cn[i], cn[j], r * av.dot(qp.grad[j]) * qp.phi[i]);
    }
  });
}

SparseMatrix assemble_Btilde(const SpaceSet& s, const QuadField& rho, const Vector& a) {
  check_positive_density(s, rho);
  SparseMatrix C = assemble_convection(s, rho, a);
  SparseMatrix Ct = C.transpose();
  SparseMatrix B = 0.5 * (C - Ct);
  B.prune(0.0);
  return B;
}

SparseMatrix assemble_B(const SpaceSet& s, const QuadField& rho, const Vector& a) {
  return blockdiag2(assemble_Btilde(s, rho, a));
}

SparseMatrix assemble_B_first_slot(const SpaceSet& s, const QuadField& rho, const Vector& e) {
  const int N = s.n_nodes;
  return assemble_cells(s, 2 * N, 2 * N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    std::array<LocalField, 2> ef = {gather(s, e, t), gather(s, e, t, N)};
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = qpt(s, t, q);
      const double r = 0.5 * rho[t * kQuadPoints + q] * qp.w;
      std::array<double, 2> ev = {ef[0].value(qp), ef[1].value(qp)};
      std::array<Vec2, 2> eg = {ef[0].grad(qp), ef[1].grad(qp)};
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) {
              double v = qp.phi[j] * (eg[c][d] * qp.phi[i] - qp.grad[i][d] * ev[c]);
              out.emplace_back(c * N + cn[i], d * N + cn[j], r * v);
            }
    }
  });
}

SparseMatrix assemble_Btilde_first_slot(const SpaceSet& s, const QuadField& rho, const Vector& w) {
  const int N = s.n_nodes;
  return assemble_cells(s, N, 2 * N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    LocalField wf = gather(s, w, t);
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = qpt(s, t, q);
      const double r = 0.5 * rho[t * kQuadPoints + q] * qp.w;
      const double wv = wf.value(qp);
      const Vec2 wg = wf.grad(qp);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          for (int d = 0; d < 2; ++d)
            out.emplace_back(cn[i], d * N + cn[j], r * qp.phi[j] * (wg[d] * qp.phi[i] - qp.grad[i][d] * wv));
    }
  });
}

SparseMatrix assemble_rot_coupling(const SpaceSet& s) {
  const int N = s.n_nodes;
  return assemble_cells(s, 2 * N, N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = qpt(s, t, q);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          out.emplace_back(cn[i], cn[j], qp.w * qp.grad[j].y() * qp.phi[i]);
          out.emplace_back(N + cn[i], cn[j], -qp.w * qp.grad[j].x() * qp.phi[i]);
        }
    }
  });
}

SparseMatrix assemble_rot_coupling_u(const SpaceSet& s) {
  const int N = s.n_nodes;
  return assemble_cells(s, N, 2 * N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = qpt(s, t, q);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          out.emplace_back(cn[i], cn[j], -qp.w * qp.grad[j].y() * qp.phi[i]);
          out.emplace_back(cn[i], N + cn[j], qp.w * qp.grad[j].x() * qp.phi[i]);
        }
    }
  });
}

SparseMatrix assemble_rotrot(const SpaceSet& s) {
  const int N = s.n_nodes;
  return assemble_cells(s, 2 * N, 2 * N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = qpt(s, t, q);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          const std::array<double, 2> ri = {-qp.grad[i].y(), qp.grad[i].x()};
          const std::array<double, 2> rj = {-qp.grad[j].y(), qp.grad[j].x()};
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) out.emplace_back(c * N + cn[i], d * N + cn[j], qp.w * ri[c] * rj[d]);
        }
    }
  });
}

SparseMatrix assemble_divergence(const SpaceSet& s) {
  const int N = s.n_nodes;
  return assemble_cells(s, s.pressure_dim(), 2 * N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    const auto& tri = s.mesh.triangles[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = qpt(s, t, q);
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 6; ++j)
          for (int d = 0; d < 2; ++d) out.emplace_back(tri[k], d * N + cn[j], -qp.w * qp.p1[k] * qp.grad[j][d]);
    }
  });
}

Vector assemble_load(const SpaceSet& s, const QuadField* rho, const QuadField& fx, const QuadField& fy) {
  const int N = s.n_nodes;
  Vector b = Vector::Zero(2 * N);
  for (int t = 0; t < s.cells(); ++t) {
    const auto& cn = s.cell_nodes[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const int k = t * kQuadPoints + q;
      const auto& qp = s.quad[k];
      const double w = qp.w * (rho ? (*rho)[k] : 1.0);
      for (int i = 0; i < 6; ++i) {
        b[cn[i]] += w * fx[k] * qp.phi[i];
        b[N + cn[i]] += w * fy[k] * qp.phi[i];
      }
    }
  }
  return b;
}

Vector assemble_scalar_load(const SpaceSet& s, const QuadField* rho, const QuadField& g) {
  Vector b = Vector::Zero(s.n_nodes);
  for (int t = 0; t < s.cells(); ++t) {
    const auto& cn = s.cell_nodes[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const int k = t * kQuadPoints + q;
      const auto& qp = s.quad[k];
      const double w = qp.w * (rho ? (*rho)[k] : 1.0);
      for (int i = 0; i < 6; ++i) b[cn[i]] += w * g[k] * qp.phi[i];
    }
  }
  return b;
}

SparseMatrix assemble_momentum_density_sensitivity(const SpaceSet& s, const QuadField& drho, const Vector& u,
                                                   const QuadField& fx, const QuadField& fy) {
  const int N = s.n_nodes;
  return assemble_cells(s, 2 * N, N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    std::array<LocalField, 2> uf = {gather(s, u, t), gather(s, u, t, N)};
    for (int q = 0; q < kQuadPoints; ++q) {
      const int k = t * kQuadPoints + q;
      const auto& qp = s.quad[k];
      const double d = drho[k] * qp.w;
      if (d == 0.0) continue;
      const Vec2 uv(uf[0].value(qp), uf[1].value(qp));
      const std::array<double, 2> conv = {uv.dot(uf[0].grad(qp)), uv.dot(uf[1].grad(qp))};
      const std::array<double, 2> f = {fx[k], fy[k]};
      for (int i = 0; i < 6; ++i) {
        const double adv_test = uv.dot(qp.grad[i]);
        for (int c = 0; c < 2; ++c) {
          const double integrand = 0.5 * (conv[c] * qp.phi[i] - adv_test * (c == 0 ? uv.x() : uv.y())) - f[c] * qp.phi[i];
          for (int j = 0; j < 6; ++j) out.emplace_back(c * N + cn[i], cn[j], d * qp.phi[j] * integrand);
        }
      }
    }
  });
}

SparseMatrix assemble_rotation_density_sensitivity(const SpaceSet& s, const QuadField& drho, const Vector& u,
                                                   const Vector& w, const QuadField& g) {
  const int N = s.n_nodes;
  return assemble_cells(s, N, N, [&](int t, std::vector<Triplet>& out) {
    const auto& cn = s.cell_nodes[t];
    LocalField ux = gather(s, u, t), uy = gather(s, u, t, N), wf = gather(s, w, t);
    for (int q = 0; q < kQuadPoints; ++q) {
      const int k = t * kQuadPoints + q;
      const auto& qp = s.quad[k];
      const double d = drho[k] * qp.w;
      if (d == 0.0) continue;
      const Vec2 uv(ux.value(qp), uy.value(qp));
      const double wv = wf.value(qp);
      const double conv = uv.dot(wf.grad(qp));
      for (int i = 0; i < 6; ++i) {
        const double integrand = 0.5 * (conv * qp.phi[i] - uv.dot(qp.grad[i]) * wv) - g[k] * qp.phi[i];
        for (int j = 0; j < 6; ++j) out.emplace_back(cn[i], cn[j], d * qp.phi[j] * integrand);
      }
    }
  });
}

void check_positive_density(const SpaceSet& s, const QuadField& rho) {
  for (size_t k = 0; k < rho.size(); ++k)
    if (!(rho[k] > 0.0)) {
      std::ostringstream os;
      os << "nonpositive density " << rho[k] << " at quadrature point (" << s.quad[k].x.x() << ", " << s.quad[k].x.y()
         << ")";
      throw NumericalError(os.str());
    }
}

double integrate(const SpaceSet& s, const QuadField& f) {
  double sum = 0.0;
  for (size_t k = 0; k < f.size(); ++k) sum += s.quad[k].w * f[k];
  return sum;
}

double h1_norm(const SpaceSet&, const SparseMatrix& gram, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(gram * v)));
}

}  // namespace mpoc
