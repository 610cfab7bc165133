#ifndef MPOC_CLI_HPP
#define MPOC_CLI_HPP

#include "mpoc/config.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace mpoc {

enum ExitCode { kExitOk = 0, kExitNumerical = 1, kExitInput = 2 };

struct RunRequest {
  std::string command;  // solve, gradcheck, optimize, penalty
  std::filesystem::path config;
  std::optional<int> refine_levels;  // --refine N: run N successively refined meshes with h-tagged files
  std::optional<std::filesystem::path> out;
};

// Loads the config and runs the command, mapping InputError to 2 and other failures to 1.
int run_request(const RunRequest& req, std::ostream& log, std::ostream& err);

// One command on one mesh level. `tag` is appended to every output file stem.
int cmd_solve(const ProblemConfig& cfg, const Mesh& mesh, const std::filesystem::path& dir, const std::string& tag,
              std::ostream& log);
int cmd_gradcheck(const ProblemConfig& cfg, const Mesh& mesh, const std::filesystem::path& dir, const std::string& tag,
                  std::ostream& log);
int cmd_optimize(const ProblemConfig& cfg, const Mesh& mesh, const std::filesystem::path& dir, const std::string& tag,
                 std::ostream& log);
int cmd_penalty(const ProblemConfig& cfg, const Mesh& mesh, const std::filesystem::path& dir, const std::string& tag,
                std::ostream& log);

// Longest mesh edge.
double mesh_size(const Mesh& mesh);

}  // namespace mpoc

#endif
