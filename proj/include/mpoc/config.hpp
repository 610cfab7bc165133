#ifndef MPOC_CONFIG_HPP
#define MPOC_CONFIG_HPP

#include "mpoc/expression.hpp"
#include "mpoc/optimizer.hpp"
#include "mpoc/penalty_path.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>

namespace mpoc {

// Line-based `key = value` file with `[section]` headers; `#` starts a comment.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& source);
  bool has(const std::string& section, const std::string& key) const;
  // Throws InputError when missing.
  const std::string& get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const;
  double real(const std::string& section, const std::string& key, double fallback) const;
  long long integer(const std::string& section, const std::string& key, long long fallback) const;
  std::vector<double> real_list(const std::string& section, const std::string& key,
                                const std::vector<double>& fallback) const;
  // Throws InputError on any key not in `known` ("section.key").
  void check_known(const std::vector<std::string>& known) const;
  const std::string& source() const { return source_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
  std::map<std::string, int> lines_;
  std::string source_;
};

enum class TargetMode { Expressions, InverseCrime };

struct ProblemConfig {
  std::filesystem::path mesh_path;
  int refine = 0;
  ModelParams params;
  // Expressions in (x, y); boundary data in (x, y, s).
  Expression f_x, f_y, g, u0_x, u0_y, w0, rho0;
  TargetMode target_mode = TargetMode::Expressions;
  Expression ud_x, ud_y, wd, rhod;
  Expression true_g1_x, true_g1_y, true_g2;  // inverse-crime controls
  Expression g1_x, g1_y, g2;                 // initial controls
  double g1_lower = -1e6, g1_upper = 1e6, g2_lower = -1e6, g2_upper = 1e6;
  SolverOptions solver;
  OptimizerOptions optimizer;
  PenaltyPathOptions penalty;
  int grad_directions = 5;
  double grad_h = 1e-3;
  double grad_tol = 1e-4;
  std::uint64_t seed = 42;
  int threads = 1;
  std::filesystem::path output = "out";
};

// Relative mesh paths resolve against base_dir. Throws InputError on any invalid entry.
ProblemConfig parse_problem_config(std::istream& in, const std::string& source, const std::filesystem::path& base_dir);
ProblemConfig load_problem_config(const std::filesystem::path& path);

Mesh config_mesh(const ProblemConfig& cfg, int extra_refine = 0);
ControlPair config_controls(const Problem& pb, const ProblemConfig& cfg);
// Inverse-crime targets are the state at the true controls.
Targets config_targets(const Problem& pb, const ProblemConfig& cfg);

}  // namespace mpoc

#endif
