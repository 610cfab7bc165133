#ifndef MPOC_IO_HPP
#define MPOC_IO_HPP

#include "mpoc/fe_space.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace mpoc {

// Integers print as integers, reals with 17 significant digits.
using CsvCell = std::variant<long long, double, std::string>;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<CsvCell> row);
  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
  size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

std::string format_real(double v);

// Legacy ASCII unstructured grid; each quadratic triangle is split into four linear ones.
struct VtkField {
  std::string name;
  Vector values;       // nodal values, one per node or blocked (x block, y block)
  int components = 1;  // 1 or 2
};
void write_vtk(const std::filesystem::path& path, const SpaceSet& s, const std::vector<VtkField>& fields);

}  // namespace mpoc

#endif
