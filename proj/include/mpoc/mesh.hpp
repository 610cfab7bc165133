#ifndef MPOC_MESH_HPP
#define MPOC_MESH_HPP

#include "mpoc/common.hpp"

#include <array>
#include <istream>
#include <string>
#include <vector>

namespace mpoc {

enum class VelocityTag { G0, G1, G2 };
enum class RotationTag { G0, G3 };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  VelocityTag vtag = VelocityTag::G0;
  RotationTag rtag = RotationTag::G0;
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  // After validation every edge runs counterclockwise along the boundary (a -> b).
  std::vector<BoundaryEdge> boundary_edges;
  int arc_length_origin = 0;

  double triangle_area(int t) const;
  double total_area() const;
  double boundary_length() const;
  double edge_length(const BoundaryEdge& e) const;
  double max_edge_length() const;
};

struct BoundaryArc {
  std::vector<int> edges;      // indices into Mesh::boundary_edges, ordered from x0
  std::vector<int> vertices;   // edges.size() + 1 vertices, starting at x0
  std::vector<double> cumulative;
  // +1 when the arc runs counterclockwise from x0, -1 when clockwise.
  int direction = 1;
  double length() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

struct EdgeTable {
  std::vector<std::array<int, 2>> edges;         // (min, max) vertex pairs
  std::vector<std::array<int, 3>> cell_edges;    // cell_edges[t][k] is edge (v_k, v_{k+1})
  std::vector<int> cells_per_edge;
};

struct MeshCheckOptions {
  // Enforce disjoint closures of Γ1/Γ2 and Γ0/Γ2. Off by default; shared corners are
  // handled by giving Dirichlet data precedence.
  bool require_separation = false;
};

Mesh parse_mesh(std::istream& in, const std::string& source_name = "<stream>",
                const MeshCheckOptions& opts = {});
Mesh load_mesh(const std::string& path, const MeshCheckOptions& opts = {});
void write_mesh(std::ostream& out, const Mesh& mesh);

// Repairs orientation and checks every structural invariant; throws InputError naming the check.
void validate_mesh(Mesh& mesh, const MeshCheckOptions& opts = {});

EdgeTable build_edge_table(const Mesh& mesh);
Mesh refine_uniform(const Mesh& mesh);
BoundaryArc gamma0_arclength(const Mesh& mesh);

// Boundary edge indices in counterclockwise order, starting with the edge leaving x0.
std::vector<int> boundary_loop(const Mesh& mesh);
bool gammas_separated(const Mesh& mesh);

const char* to_string(VelocityTag t);
const char* to_string(RotationTag t);

}  // namespace mpoc

#endif
