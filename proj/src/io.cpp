#include "mpoc/io.hpp"

#include <cstdio>
#include <fstream>

namespace mpoc {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<CsvCell> row) {
  if (row.size() != header_.size()) throw std::logic_error("CSV row width does not match header");
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  for (size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
  out << "\n";
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      if (auto p = std::get_if<long long>(&row[i])) out << *p;
      else if (auto d = std::get_if<double>(&row[i])) out << format_real(*d);
      else out << std::get<std::string>(row[i]);
    }
    out << "\n";
  }
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  write(out);
}

void write_vtk(const std::filesystem::path& path, const SpaceSet& s, const std::vector<VtkField>& fields) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  const int N = s.n_nodes;
  out << "# vtk DataFile Version 3.0\nmpoc\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << N << " double\n";
  for (const Vec2& p : s.nodes) out << format_real(p.x()) << " " << format_real(p.y()) << " 0\n";
  const int nc = 4 * s.cells();
  out << "CELLS " << nc << " " << 4 * nc << "\n";
  // Local nodes 3, 4, 5 are the midpoints of edges 01, 12, 20.
  static constexpr int kSplit[4][3] = {{0, 3, 5}, {3, 1, 4}, {5, 4, 2}, {3, 4, 5}};
  for (const auto& cn : s.cell_nodes)
    for (const auto& tri : kSplit) out << "3 " << cn[tri[0]] << " " << cn[tri[1]] << " " << cn[tri[2]] << "\n";
  out << "CELL_TYPES " << nc << "\n";
  for (int i = 0; i < nc; ++i) out << "5\n";
  if (fields.empty()) return;
  out << "POINT_DATA " << N << "\n";
  for (const auto& f : fields) {
    if (f.values.size() != static_cast<Eigen::Index>(f.components) * N)
      throw std::logic_error("VTK field '" + f.name + "' has the wrong length");
    if (f.components == 1) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (int n = 0; n < N; ++n) out << format_real(f.values[n]) << "\n";
    } else {
      out << "VECTORS " << f.name << " double\n";
      for (int n = 0; n < N; ++n) out << format_real(f.values[n]) << " " << format_real(f.values[N + n]) << " 0\n";
    }
  }
}

}  // namespace mpoc
