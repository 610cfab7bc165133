#ifndef MPOC_FE_SPACE_HPP
#define MPOC_FE_SPACE_HPP

#include "mpoc/common.hpp"
#include "mpoc/mesh.hpp"

#include <array>

namespace mpoc {

constexpr int kQuadPoints = 6;  // degree-4 rule on triangles
constexpr int kEdgeQuadPoints = 3;  // Gauss-Legendre on edges

// Barycentric coordinates and weights (weights sum to 1; multiply by the area).
extern const std::array<std::array<double, 3>, kQuadPoints> kTriangleQuadBary;
extern const std::array<double, kQuadPoints> kTriangleQuadWeights;
// Points on [0,1] and weights summing to 1.
extern const std::array<double, kEdgeQuadPoints> kEdgeQuadPoints01;
extern const std::array<double, kEdgeQuadPoints> kEdgeQuadWeights;

// Quadratic basis on an edge parametrized by t in [0,1]: start, midpoint, end.
std::array<double, 3> edge_basis(double t);

enum class VelocityNodeKind {
  Interior,  // both components free
  Slip,      // on Γ2: tangential component free, normal component zero
  Gamma0,    // Dirichlet data u0
  Control,   // Dirichlet data g1 (interior node of Γ1)
  Zero,      // homogeneous Dirichlet: Γ1 endpoints away from Γ0, corners of Γ2
};

enum class RotationNodeKind { Interior, Gamma0, Control };

struct QuadPoint {
  Vec2 x;
  double w = 0.0;  // weight times area
  std::array<double, 6> phi{};
  std::array<Vec2, 6> grad{};
  std::array<double, 3> p1{};  // linear (pressure) basis values
};

struct BoundarySegmentDofs {
  int edge = 0;                  // index into Mesh::boundary_edges
  std::array<int, 3> nodes{};    // start, midpoint, end (counterclockwise)
  Vec2 normal;                   // outward unit normal
  double length = 0.0;
  VelocityTag vtag = VelocityTag::G0;
  RotationTag rtag = RotationTag::G0;
};

// Taylor-Hood spaces (quadratic velocity, linear pressure) plus quadratic scalar spaces for
// the microrotation and the stream function. Scalar quadratic nodes: vertices, then edge
// midpoints. Velocity vectors are blocked by component: index c * n_nodes + node.
struct SpaceSet {
  Mesh mesh;
  EdgeTable edges;
  int n_vertices = 0;
  int n_nodes = 0;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 6>> cell_nodes;
  std::vector<QuadPoint> quad;  // cells * kQuadPoints
  std::vector<BoundarySegmentDofs> boundary;  // counterclockwise from x0

  std::vector<VelocityNodeKind> vel_kind;
  std::vector<RotationNodeKind> rot_kind;
  std::vector<Vec2> slip_tangent;
  std::vector<char> on_boundary;
  std::vector<char> on_nonslip;     // node lies on a Γ0 or Γ1 edge
  std::vector<double> arclength;    // arc length from x0 for Γ0 nodes, 0 elsewhere

  std::vector<int> gamma0_nodes;    // ordered along Γ0 from x0
  std::vector<int> control1_nodes;  // g1 nodes (two components each)
  std::vector<int> control3_nodes;  // g2 nodes
  std::vector<int> boundary_nodes;
  std::vector<int> nonslip_nodes;   // trace nodes of Γ \ Γ2
  std::vector<int> interior_nodes;

  // Homogeneous velocity space (Dirichlet nodes removed, slip nodes tangential).
  SparseMatrix P;
  // Velocity space with free traces on Γ \ Γ2 and u.n = 0 on Γ2 (discrete H_sigma before div-free).
  SparseMatrix P_sigma;
  // Scalar space vanishing on Γ.
  SparseMatrix Q;
  int pinned_pressure = 0;

  int cells() const { return static_cast<int>(cell_nodes.size()); }
  int velocity_dim() const { return 2 * n_nodes; }
  int pressure_dim() const { return n_vertices; }
};

SpaceSet build_spaces(const Mesh& mesh);

// Velocity value at a node from a blocked vector.
inline Vec2 node_velocity(const SpaceSet& s, const Vector& u, int node) {
  return Vec2(u[node], u[s.n_nodes + node]);
}

// Field values and gradients at quadrature points.
QuadField scalar_at_quad(const SpaceSet& s, const Vector& w);
void vector_at_quad(const SpaceSet& s, const Vector& u, QuadField& ux, QuadField& uy);
QuadField function_at_quad(const SpaceSet& s, const ScalarField& f);

// Nodal interpolation of closed-form fields.
Vector interpolate_scalar(const SpaceSet& s, const ScalarField& f);
Vector interpolate_vector(const SpaceSet& s, const VectorField& f);

}  // namespace mpoc

#endif
