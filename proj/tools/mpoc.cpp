#include "mpoc/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Stationary micropolar flow with variable density: state solver and boundary control"};
  app.require_subcommand(1, 1);
  mpoc::RunRequest req;
  int refine = 0;
  std::string out;
  for (const char* name : {"solve", "gradcheck", "optimize", "penalty"}) {
    const char* help = std::string(name) == "solve"       ? "Solve the state equations"
                       : std::string(name) == "gradcheck" ? "Compare adjoint and finite-difference derivatives"
                       : std::string(name) == "optimize"  ? "Run the projected-gradient control optimizer"
                                                          : "Run the penalty-path experiment";
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", req.config, "Problem configuration file")->required();
    sub->add_option("--refine", refine, "Run N successively refined meshes with h-tagged outputs")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Output directory (overrides run.output)");
    sub->callback([&req, sub] { req.command = sub->get_name(); });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mpoc::kExitInput;
  }
  if (refine > 0) req.refine_levels = refine;
  if (!out.empty()) req.out = out;
  return mpoc::run_request(req, std::cout, std::cerr);
}
