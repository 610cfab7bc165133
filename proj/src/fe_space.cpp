#include "mpoc/fe_space.hpp"

#include <cmath>
#include <unordered_map>

namespace mpoc {

const std::array<std::array<double, 3>, kQuadPoints> kTriangleQuadBary = {{
    {0.44594849091596488632, 0.44594849091596488632, 0.10810301816807022736},
    {0.44594849091596488632, 0.10810301816807022736, 0.44594849091596488632},
    {0.10810301816807022736, 0.44594849091596488632, 0.44594849091596488632},
    {0.091576213509770743460, 0.091576213509770743460, 0.81684757298045851308},
    {0.091576213509770743460, 0.81684757298045851308, 0.091576213509770743460},
    {0.81684757298045851308, 0.091576213509770743460, 0.091576213509770743460},
}};
const std::array<double, kQuadPoints> kTriangleQuadWeights = {
    0.22338158967801146570, 0.22338158967801146570, 0.22338158967801146570,
    0.10995174365532186764, 0.10995174365532186764, 0.10995174365532186764};

const std::array<double, kEdgeQuadPoints> kEdgeQuadPoints01 = {0.5 - 0.5 * 0.77459666924148337704, 0.5,
                                                               0.5 + 0.5 * 0.77459666924148337704};
const std::array<double, kEdgeQuadPoints> kEdgeQuadWeights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

std::array<double, 3> edge_basis(double t) {
  return {(1 - t) * (1 - 2 * t), 4 * t * (1 - t), t * (2 * t - 1)};
}

namespace {

long long edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<long long>(a) << 32) | static_cast<unsigned>(b);
}

void fill_quadrature(SpaceSet& s) {
  const auto& V = s.mesh.vertices;
  s.quad.resize(static_cast<size_t>(s.cells()) * kQuadPoints);
  for (int t = 0; t < s.cells(); ++t) {
    const auto& tri = s.mesh.triangles[t];
    const Vec2 p0 = V[tri[0]], p1 = V[tri[1]], p2 = V[tri[2]];
    Eigen::Matrix2d J;
    J.col(0) = p1 - p0;
    J.col(1) = p2 - p0;
    const double det = J.determinant();
    const Eigen::Matrix2d Jinv = J.inverse();
    std::array<Vec2, 3> gl;
    gl[1] = Jinv.row(0).transpose();
    gl[2] = Jinv.row(1).transpose();
    gl[0] = -(gl[1] + gl[2]);
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& l = kTriangleQuadBary[q];
      QuadPoint& qp = s.quad[static_cast<size_t>(t) * kQuadPoints + q];
      qp.x = l[0] * p0 + l[1] * p1 + l[2] * p2;
      qp.w = kTriangleQuadWeights[q] * 0.5 * det;
      qp.p1 = {l[0], l[1], l[2]};
      for (int k = 0; k < 3; ++k) {
        qp.phi[k] = l[k] * (2 * l[k] - 1);
        qp.grad[k] = (4 * l[k] - 1) * gl[k];
        int a = k, b = (k + 1) % 3;
        qp.phi[3 + k] = 4 * l[a] * l[b];
        qp.grad[3 + k] = 4 * (l[b] * gl[a] + l[a] * gl[b]);
      }
    }
  }
}

}  // namespace

SpaceSet build_spaces(const Mesh& mesh) {
  SpaceSet s;
  s.mesh = mesh;
  s.edges = build_edge_table(mesh);
  s.n_vertices = static_cast<int>(mesh.vertices.size());
  s.n_nodes = s.n_vertices + static_cast<int>(s.edges.edges.size());
  const int N = s.n_nodes;
  s.nodes = mesh.vertices;
  for (const auto& e : s.edges.edges) s.nodes.push_back(0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]]));
  s.cell_nodes.resize(mesh.triangles.size());
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    s.cell_nodes[t] = {tri[0], tri[1], tri[2], s.n_vertices + s.edges.cell_edges[t][0],
                       s.n_vertices + s.edges.cell_edges[t][1], s.n_vertices + s.edges.cell_edges[t][2]};
  }
  fill_quadrature(s);

  std::unordered_map<long long, int> edge_index;
  for (size_t e = 0; e < s.edges.edges.size(); ++e) edge_index[edge_key(s.edges.edges[e][0], s.edges.edges[e][1])] = static_cast<int>(e);

  std::vector<int> loop = boundary_loop(mesh);
  std::vector<int> seg_out(s.n_vertices, -1), seg_in(s.n_vertices, -1);
  for (int e : loop) {
    const auto& be = mesh.boundary_edges[e];
    BoundarySegmentDofs seg;
    seg.edge = e;
    seg.nodes = {be.a, s.n_vertices + edge_index.at(edge_key(be.a, be.b)), be.b};
    Vec2 t = mesh.vertices[be.b] - mesh.vertices[be.a];
    seg.length = t.norm();
    t /= seg.length;
    seg.normal = Vec2(t.y(), -t.x());
    seg.vtag = be.vtag;
    seg.rtag = be.rtag;
    seg_out[be.a] = static_cast<int>(s.boundary.size());
    seg_in[be.b] = static_cast<int>(s.boundary.size());
    s.boundary.push_back(seg);
  }

  s.vel_kind.assign(N, VelocityNodeKind::Interior);
  s.rot_kind.assign(N, RotationNodeKind::Interior);
  s.slip_tangent.assign(N, Vec2::Zero());
  s.on_boundary.assign(N, 0);
  s.on_nonslip.assign(N, 0);
  s.arclength.assign(N, 0.0);

  for (const auto& seg : s.boundary) {
    const Vec2 tangent(-seg.normal.y(), seg.normal.x());
    for (int k = 0; k < 3; ++k) {
      s.on_boundary[seg.nodes[k]] = 1;
      if (seg.vtag != VelocityTag::G2) s.on_nonslip[seg.nodes[k]] = 1;
    }
    const int m = seg.nodes[1];
    switch (seg.vtag) {
      case VelocityTag::G0: s.vel_kind[m] = VelocityNodeKind::Gamma0; break;
      case VelocityTag::G1: s.vel_kind[m] = VelocityNodeKind::Control; break;
      case VelocityTag::G2:
        s.vel_kind[m] = VelocityNodeKind::Slip;
        s.slip_tangent[m] = tangent;
        break;
    }
    s.rot_kind[m] = seg.rtag == RotationTag::G0 ? RotationNodeKind::Gamma0 : RotationNodeKind::Control;
  }
  for (int v = 0; v < s.n_vertices; ++v) {
    if (seg_out[v] < 0) continue;
    const auto& a = s.boundary[seg_in[v]];
    const auto& b = s.boundary[seg_out[v]];
    if (a.vtag == VelocityTag::G0 || b.vtag == VelocityTag::G0) {
      s.vel_kind[v] = VelocityNodeKind::Gamma0;
    } else if (a.vtag == VelocityTag::G1 || b.vtag == VelocityTag::G1) {
      s.vel_kind[v] = (a.vtag == VelocityTag::G1 && b.vtag == VelocityTag::G1) ? VelocityNodeKind::Control
                                                                               : VelocityNodeKind::Zero;
    } else if (a.normal.dot(b.normal) > 1.0 - 1e-12) {
      s.vel_kind[v] = VelocityNodeKind::Slip;
      s.slip_tangent[v] = Vec2(-b.normal.y(), b.normal.x());
    } else {
      // Corner of Γ2: u.n = 0 for both adjacent edges forces u = 0.
      s.vel_kind[v] = VelocityNodeKind::Zero;
    }
    s.rot_kind[v] = (a.rtag == RotationTag::G0 || b.rtag == RotationTag::G0) ? RotationNodeKind::Gamma0
                                                                             : RotationNodeKind::Control;
  }

  BoundaryArc arc = gamma0_arclength(mesh);
  for (size_t k = 0; k < arc.edges.size(); ++k) {
    const auto& be = mesh.boundary_edges[arc.edges[k]];
    int mid = s.n_vertices + edge_index.at(edge_key(be.a, be.b));
    s.gamma0_nodes.push_back(arc.vertices[k]);
    s.arclength[arc.vertices[k]] = arc.cumulative[k];
    s.gamma0_nodes.push_back(mid);
    s.arclength[mid] = 0.5 * (arc.cumulative[k] + arc.cumulative[k + 1]);
  }
  s.gamma0_nodes.push_back(arc.vertices.back());
  s.arclength[arc.vertices.back()] = arc.cumulative.back();

  std::vector<char> added(N, 0);
  for (const auto& seg : s.boundary)
    for (int k = 0; k < 2; ++k) {
      int n = seg.nodes[k];
      if (added[n]) continue;
      added[n] = 1;
      s.boundary_nodes.push_back(n);
      if (s.on_nonslip[n]) s.nonslip_nodes.push_back(n);
      if (s.vel_kind[n] == VelocityNodeKind::Control) s.control1_nodes.push_back(n);
      if (s.rot_kind[n] == RotationNodeKind::Control) s.control3_nodes.push_back(n);
    }
  for (int n = 0; n < N; ++n)
    if (!s.on_boundary[n]) s.interior_nodes.push_back(n);

  std::vector<Triplet> tp, ts, tq;
  int cp = 0, cs = 0;
  for (int n = 0; n < N; ++n) {
    const auto kind = s.vel_kind[n];
    if (kind == VelocityNodeKind::Interior) {
      tp.emplace_back(n, cp++, 1.0);
      tp.emplace_back(N + n, cp++, 1.0);
    } else if (kind == VelocityNodeKind::Slip) {
      tp.emplace_back(n, cp, s.slip_tangent[n].x());
      tp.emplace_back(N + n, cp++, s.slip_tangent[n].y());
    }
    if (kind == VelocityNodeKind::Interior || s.on_nonslip[n]) {
      ts.emplace_back(n, cs++, 1.0);
      ts.emplace_back(N + n, cs++, 1.0);
    } else if (kind == VelocityNodeKind::Slip) {
      ts.emplace_back(n, cs, s.slip_tangent[n].x());
      ts.emplace_back(N + n, cs++, s.slip_tangent[n].y());
    }
  }
  for (size_t k = 0; k < s.interior_nodes.size(); ++k) tq.emplace_back(s.interior_nodes[k], static_cast<int>(k), 1.0);
  s.P = SparseMatrix(2 * N, cp);
  s.P.setFromTriplets(tp.begin(), tp.end());
  s.P_sigma = SparseMatrix(2 * N, cs);
  s.P_sigma.setFromTriplets(ts.begin(), ts.end());
  s.Q = SparseMatrix(N, static_cast<int>(s.interior_nodes.size()));
  s.Q.setFromTriplets(tq.begin(), tq.end());
  s.pinned_pressure = 0;
  return s;
}

QuadField scalar_at_quad(const SpaceSet& s, const Vector& w) {
  QuadField out(s.quad.size());
  for (int t = 0; t < s.cells(); ++t) {
    const auto& cn = s.cell_nodes[t];
    for (int q = 0; q < kQuadPoints; ++q) {
      const auto& qp = s.quad[t * kQuadPoints + q];
      double v = 0;
      for (int a = 0; a < 6; ++a) v += qp.phi[a] * w[cn[a]];
      out[t * kQuadPoints + q] = v;
    }
  }
  return out;
}

void vector_at_quad(const SpaceSet& s, const Vector& u, QuadField& ux, QuadField& uy) {
  ux = scalar_at_quad(s, u.head(s.n_nodes));
  uy = scalar_at_quad(s, u.tail(s.n_nodes));
}

QuadField function_at_quad(const SpaceSet& s, const ScalarField& f) {
  QuadField out(s.quad.size());
  for (size_t i = 0; i < s.quad.size(); ++i) out[i] = f ? f(s.quad[i].x) : 0.0;
  return out;
}

Vector interpolate_scalar(const SpaceSet& s, const ScalarField& f) {
  Vector v(s.n_nodes);
  for (int n = 0; n < s.n_nodes; ++n) v[n] = f(s.nodes[n]);
  return v;
}

Vector interpolate_vector(const SpaceSet& s, const VectorField& f) {
  Vector v(2 * s.n_nodes);
  for (int n = 0; n < s.n_nodes; ++n) {
    Vec2 x = f(s.nodes[n]);
    v[n] = x.x();
    v[s.n_nodes + n] = x.y();
  }
  return v;
}

}  // namespace mpoc
