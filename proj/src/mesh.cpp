#include "mpoc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace mpoc {

namespace {

struct LineReader {
  std::istream& in;
  std::string source;
  int line_no = 0;

  // Next non-blank, non-comment line split into tokens.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      tokens.clear();
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError(source + ": line " + std::to_string(line_no) + ": " + msg);
  }

  std::vector<std::string> expect(const std::string& what) {
    std::vector<std::string> t;
    if (!next(t)) {
      ++line_no;
      fail("unexpected end of file, expected " + what);
    }
    return t;
  }

  long to_int(const std::string& s) const {
    try {
      size_t pos = 0;
      long v = std::stol(s, &pos);
      if (pos != s.size()) fail("invalid integer '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("invalid integer '" + s + "'");
    }
  }

  double to_double(const std::string& s) const {
    try {
      size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(v)) fail("invalid number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("invalid number '" + s + "'");
    }
  }

  long count_header(const std::string& keyword) {
    auto t = expect("'" + keyword + " N'");
    if (t.size() != 2 || t[0] != keyword) fail("expected '" + keyword + " N'");
    long n = to_int(t[1]);
    if (n < 0) fail("negative count");
    return n;
  }
};

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

long long edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<long long>(a) << 32) | static_cast<unsigned>(b);
}

}  // namespace

const char* to_string(VelocityTag t) {
  switch (t) {
    case VelocityTag::G0: return "G0";
    case VelocityTag::G1: return "G1";
    case VelocityTag::G2: return "G2";
  }
  return "?";
}

const char* to_string(RotationTag t) { return t == RotationTag::G0 ? "G0" : "G3"; }

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double Mesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) s += triangle_area(t);
  return s;
}

double Mesh::edge_length(const BoundaryEdge& e) const { return (vertices[e.b] - vertices[e.a]).norm(); }

double Mesh::boundary_length() const {
  double s = 0.0;
  for (const auto& e : boundary_edges) s += edge_length(e);
  return s;
}

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& tri : triangles)
    for (int k = 0; k < 3; ++k) h = std::max(h, (vertices[tri[(k + 1) % 3]] - vertices[tri[k]]).norm());
  return h;
}

EdgeTable build_edge_table(const Mesh& mesh) {
  EdgeTable table;
  std::unordered_map<long long, int> index;
  index.reserve(mesh.triangles.size() * 2);
  table.cell_edges.resize(mesh.triangles.size());
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      auto [it, inserted] = index.emplace(edge_key(a, b), static_cast<int>(table.edges.size()));
      if (inserted) {
        table.edges.push_back({std::min(a, b), std::max(a, b)});
        table.cells_per_edge.push_back(0);
      }
      table.cell_edges[t][k] = it->second;
      ++table.cells_per_edge[it->second];
    }
  }
  return table;
}

std::vector<int> boundary_loop(const Mesh& mesh) {
  std::unordered_map<int, int> leaving;
  for (size_t i = 0; i < mesh.boundary_edges.size(); ++i) leaving[mesh.boundary_edges[i].a] = static_cast<int>(i);
  std::vector<int> loop;
  auto it = leaving.find(mesh.arc_length_origin);
  if (it == leaving.end()) return loop;
  int e = it->second;
  for (size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    loop.push_back(e);
    auto nx = leaving.find(mesh.boundary_edges[e].b);
    if (nx == leaving.end()) break;
    e = nx->second;
    if (e == loop.front()) break;
  }
  return loop;
}

bool gammas_separated(const Mesh& mesh) {
  std::vector<char> touches_g2(mesh.vertices.size(), 0), touches_other(mesh.vertices.size(), 0);
  for (const auto& e : mesh.boundary_edges) {
    auto& mark = e.vtag == VelocityTag::G2 ? touches_g2 : touches_other;
    mark[e.a] = mark[e.b] = 1;
  }
  for (size_t v = 0; v < mesh.vertices.size(); ++v)
    if (touches_g2[v] && touches_other[v]) return false;
  return true;
}

void validate_mesh(Mesh& mesh, const MeshCheckOptions& opts) {
  const int nv = static_cast<int>(mesh.vertices.size());
  auto check_index = [&](int i, const char* what) {
    if (i < 0 || i >= nv) throw InputError(std::string("vertex index out of range in ") + what);
  };
  if (mesh.triangles.empty()) throw InputError("mesh has no triangles");
  for (auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) check_index(tri[k], "triangles");
    double area = signed_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    double scale = std::max({(mesh.vertices[tri[1]] - mesh.vertices[tri[0]]).squaredNorm(),
                             (mesh.vertices[tri[2]] - mesh.vertices[tri[0]]).squaredNorm(), 1e-300});
    if (std::abs(area) <= 1e-14 * scale) throw InputError("degenerate triangle (zero area)");
    if (area < 0) std::swap(tri[1], tri[2]);
  }
  EdgeTable table = build_edge_table(mesh);
  for (int c : table.cells_per_edge)
    if (c > 2) throw InputError("edge shared by more than two triangles");

  std::unordered_map<long long, int> edge_index;
  for (size_t e = 0; e < table.edges.size(); ++e) edge_index[edge_key(table.edges[e][0], table.edges[e][1])] = static_cast<int>(e);

  // Counterclockwise orientation of each topological boundary edge, read off its triangle.
  std::unordered_map<long long, std::array<int, 2>> ccw;
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (table.cells_per_edge[edge_index[edge_key(a, b)]] == 1) ccw[edge_key(a, b)] = {a, b};
    }

  std::unordered_map<long long, int> seen;
  for (auto& be : mesh.boundary_edges) {
    check_index(be.a, "bedges");
    check_index(be.b, "bedges");
    long long key = edge_key(be.a, be.b);
    auto it = ccw.find(key);
    if (it == ccw.end()) throw InputError("tagged edge " + std::to_string(be.a) + "-" + std::to_string(be.b) + " is not a boundary edge");
    if (seen.count(key)) throw InputError("boundary edge " + std::to_string(be.a) + "-" + std::to_string(be.b) + " tagged twice");
    seen[key] = 1;
    be.a = it->second[0];
    be.b = it->second[1];
  }
  if (seen.size() != ccw.size()) throw InputError("boundary edges without tags: tags do not cover the full boundary");

  check_index(mesh.arc_length_origin, "gamma0_origin");
  bool g1 = false, g3 = false, g0 = false;
  for (const auto& be : mesh.boundary_edges) {
    if ((be.vtag == VelocityTag::G0) != (be.rtag == RotationTag::G0))
      throw InputError("rotation-tag G0 must coincide with velocity-tag G0");
    g0 |= be.vtag == VelocityTag::G0;
    g1 |= be.vtag == VelocityTag::G1;
    g3 |= be.rtag == RotationTag::G3;
  }
  if (!g0) throw InputError("Γ0 is empty");
  if (!g1) throw InputError("Γ1 is empty");
  if (!g3) throw InputError("Γ3 is empty");

  // Single closed boundary curve.
  std::unordered_map<int, int> out_count, in_count;
  for (const auto& be : mesh.boundary_edges) {
    ++out_count[be.a];
    ++in_count[be.b];
  }
  for (const auto& [v, c] : out_count)
    if (c != 1 || in_count[v] != 1) throw InputError("boundary is not a single closed curve");
  if (!out_count.count(mesh.arc_length_origin)) throw InputError("gamma0_origin is not a boundary vertex");
  std::vector<int> loop = boundary_loop(mesh);
  if (loop.size() != mesh.boundary_edges.size()) throw InputError("boundary is not a single closed curve (domain must be simply connected)");

  int runs = 0;
  const size_t m = loop.size();
  for (size_t k = 0; k < m; ++k) {
    bool cur = mesh.boundary_edges[loop[k]].vtag == VelocityTag::G0;
    bool prev = mesh.boundary_edges[loop[(k + m - 1) % m]].vtag == VelocityTag::G0;
    if (cur && !prev) ++runs;
  }
  if (runs != 1) throw InputError("Γ0 not connected");
  bool starts = mesh.boundary_edges[loop.front()].vtag == VelocityTag::G0;
  bool ends = mesh.boundary_edges[loop.back()].vtag == VelocityTag::G0;
  if (starts == ends) throw InputError("gamma0_origin is not an endpoint of Γ0");

  if (opts.require_separation && !gammas_separated(mesh))
    throw InputError("closures of Γ2 and Γ0 ∪ Γ1 intersect");
}

Mesh parse_mesh(std::istream& in, const std::string& source_name, const MeshCheckOptions& opts) {
  LineReader r{in, source_name};
  Mesh mesh;
  auto header = r.expect("header");
  if (header.size() != 2 || header[0] != "mesh2d" || header[1] != "v1") r.fail("expected header 'mesh2d v1'");

  long nv = r.count_header("vertices");
  mesh.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    auto t = r.expect("vertex coordinates");
    if (t.size() != 2) r.fail("expected 'x y'");
    mesh.vertices.emplace_back(r.to_double(t[0]), r.to_double(t[1]));
  }
  long nt = r.count_header("triangles");
  for (long i = 0; i < nt; ++i) {
    auto t = r.expect("triangle");
    if (t.size() != 3) r.fail("expected 'i j k'");
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      long v = r.to_int(t[k]);
      if (v < 0 || v >= nv) r.fail("vertex index out of range");
      tri[k] = static_cast<int>(v);
    }
    mesh.triangles.push_back(tri);
  }
  long nb = r.count_header("bedges");
  for (long i = 0; i < nb; ++i) {
    auto t = r.expect("boundary edge");
    if (t.size() != 4) r.fail("expected 'i j VTAG RTAG'");
    BoundaryEdge e;
    long a = r.to_int(t[0]), b = r.to_int(t[1]);
    if (a < 0 || a >= nv || b < 0 || b >= nv) r.fail("vertex index out of range");
    e.a = static_cast<int>(a);
    e.b = static_cast<int>(b);
    if (t[2] == "G0") e.vtag = VelocityTag::G0;
    else if (t[2] == "G1") e.vtag = VelocityTag::G1;
    else if (t[2] == "G2") e.vtag = VelocityTag::G2;
    else r.fail("unknown velocity tag '" + t[2] + "'");
    if (t[3] == "G0") e.rtag = RotationTag::G0;
    else if (t[3] == "G3") e.rtag = RotationTag::G3;
    else r.fail("unknown rotation tag '" + t[3] + "'");
    mesh.boundary_edges.push_back(e);
  }
  auto o = r.expect("'gamma0_origin i'");
  if (o.size() != 2 || o[0] != "gamma0_origin") r.fail("expected 'gamma0_origin i'");
  long origin = r.to_int(o[1]);
  if (origin < 0 || origin >= nv) r.fail("gamma0_origin out of range");
  mesh.arc_length_origin = static_cast<int>(origin);
  std::vector<std::string> extra;
  if (r.next(extra)) r.fail("unexpected trailing content");

  validate_mesh(mesh, opts);
  return mesh;
}

Mesh load_mesh(const std::string& path, const MeshCheckOptions& opts) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file '" + path + "'");
  return parse_mesh(in, path, opts);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "mesh2d v1\n" << std::setprecision(17);
  out << "vertices " << mesh.vertices.size() << "\n";
  for (const auto& v : mesh.vertices) out << v.x() << " " << v.y() << "\n";
  out << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "bedges " << mesh.boundary_edges.size() << "\n";
  for (const auto& e : mesh.boundary_edges) out << e.a << " " << e.b << " " << to_string(e.vtag) << " " << to_string(e.rtag) << "\n";
  out << "gamma0_origin " << mesh.arc_length_origin << "\n";
}

Mesh refine_uniform(const Mesh& mesh) {
  EdgeTable table = build_edge_table(mesh);
  const int nv = static_cast<int>(mesh.vertices.size());
  Mesh fine;
  fine.vertices = mesh.vertices;
  fine.vertices.reserve(nv + table.edges.size());
  for (const auto& e : table.edges) fine.vertices.push_back(0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]]));
  fine.triangles.reserve(4 * mesh.triangles.size());
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& v = mesh.triangles[t];
    int m01 = nv + table.cell_edges[t][0], m12 = nv + table.cell_edges[t][1], m20 = nv + table.cell_edges[t][2];
    fine.triangles.push_back({v[0], m01, m20});
    fine.triangles.push_back({m01, v[1], m12});
    fine.triangles.push_back({m20, m12, v[2]});
    fine.triangles.push_back({m01, m12, m20});
  }
  std::unordered_map<long long, int> edge_index;
  for (size_t e = 0; e < table.edges.size(); ++e) edge_index[edge_key(table.edges[e][0], table.edges[e][1])] = static_cast<int>(e);
  for (const auto& be : mesh.boundary_edges) {
    int mid = nv + edge_index.at(edge_key(be.a, be.b));
    fine.boundary_edges.push_back({be.a, mid, be.vtag, be.rtag});
    fine.boundary_edges.push_back({mid, be.b, be.vtag, be.rtag});
  }
  fine.arc_length_origin = mesh.arc_length_origin;
  return fine;
}

BoundaryArc gamma0_arclength(const Mesh& mesh) {
  std::vector<int> loop = boundary_loop(mesh);
  BoundaryArc arc;
  if (loop.empty()) throw InputError("Γ0 is empty");
  const auto& edges = mesh.boundary_edges;
  auto is_g0 = [&](int e) { return edges[e].vtag == VelocityTag::G0; };
  if (is_g0(loop.front())) {
    arc.direction = 1;
    for (int e : loop) {
      if (!is_g0(e)) break;
      arc.edges.push_back(e);
    }
  } else if (is_g0(loop.back())) {
    arc.direction = -1;
    for (auto it = loop.rbegin(); it != loop.rend(); ++it) {
      if (!is_g0(*it)) break;
      arc.edges.push_back(*it);
    }
  } else {
    throw InputError("Γ0 is empty or does not start at gamma0_origin");
  }
  arc.vertices.push_back(mesh.arc_length_origin);
  arc.cumulative.push_back(0.0);
  for (int e : arc.edges) {
    int next = arc.direction > 0 ? edges[e].b : edges[e].a;
    arc.vertices.push_back(next);
    arc.cumulative.push_back(arc.cumulative.back() + mesh.edge_length(edges[e]));
  }
  return arc;
}

}  // namespace mpoc
