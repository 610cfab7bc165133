#include "mpoc/cli.hpp"

#include "mpoc/forms.hpp"
#include "mpoc/io.hpp"

#include <algorithm>
#include <cstdio>

namespace mpoc {

namespace {

std::filesystem::path file(const std::filesystem::path& dir, const std::string& stem, const std::string& tag,
                           const std::string& ext) {
  return dir / (stem + tag + ext);
}

Vector nodal_density(const Problem& pb, const Vector& psi) {
  Vector rho(psi.size());
  for (Eigen::Index n = 0; n < psi.size(); ++n) rho[n] = pb.profile()(psi[n]);
  return rho;
}

void write_fields(const Problem& pb, const std::filesystem::path& dir, const std::string& tag, const Vector& u,
                  const Vector& w, const Vector& psi, const Vector* lambda, const Vector* phi) {
  const SpaceSet& s = pb.spaces();
  write_vtk(file(dir, "u", tag, ".vtk"), s, {{"u", u, 2}});
  write_vtk(file(dir, "w", tag, ".vtk"), s, {{"w", w, 1}});
  write_vtk(file(dir, "rho", tag, ".vtk"), s, {{"rho", nodal_density(pb, psi), 1}});
  write_vtk(file(dir, "psi", tag, ".vtk"), s, {{"psi", psi, 1}});
  if (lambda) write_vtk(file(dir, "lambda", tag, ".vtk"), s, {{"lambda", *lambda, 2}});
  if (phi) write_vtk(file(dir, "phi", tag, ".vtk"), s, {{"phi", *phi, 1}});
}

std::string h_tag(const Mesh& mesh) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_h%.6g", mesh_size(mesh));
  return buf;
}

}  // namespace

double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) h = std::max(h, (mesh.vertices[t[k]] - mesh.vertices[t[(k + 1) % 3]]).norm());
  return h;
}

int cmd_solve(const ProblemConfig& cfg, const Mesh& mesh, const std::filesystem::path& dir, const std::string& tag,
              std::ostream& log) {
  Problem pb(mesh, cfg.params);
  const ControlPair controls = project_controls(pb, config_controls(pb, cfg));
  StateSolution st = solve_state(pb, controls, cfg.solver);
  CsvTable t({"iteration", "update_norm_H1", "energy_residual_rel", "theta_bound", "solution_norm_H1"});
  for (const auto& r : st.history)
    t.add_row({static_cast<long long>(r.iteration), r.update_norm, r.energy_residual, st.theta_bound,
               st.solution_norm});
  t.write(file(dir, "state_report", tag, ".csv"));
  write_fields(pb, dir, tag, st.u, st.w, st.psi, nullptr, nullptr);
  log << "solve" << tag << ": " << (st.converged ? "converged" : "not converged") << " after " << st.history.size()
      << " iterations (" << st.reason << "), residual " << format_real(st.residual) << "\n";
  if (!st.viscosity_ok) log << "advisory: " << st.advisory << "\n";
  return st.converged ? kExitOk : kExitNumerical;
}

int cmd_gradcheck(const ProblemConfig& cfg, const Mesh& mesh, const std::filesystem::path& dir, const std::string& tag,
                  std::ostream& log) {
  Problem pb(mesh, cfg.params);
  const Targets targets = config_targets(pb, cfg);
  const ControlPair controls = project_controls(pb, config_controls(pb, cfg));
  const auto rows = gradient_check(pb, targets, controls, cfg.grad_directions, cfg.seed, cfg.grad_h);
  CsvTable t({"direction", "adjoint_derivative", "finite_difference", "relative_error"});
  double worst = 0.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    t.add_row({static_cast<long long>(i), rows[i].adjoint, rows[i].finite_difference, rows[i].rel_error});
    worst = std::max(worst, std::isfinite(rows[i].rel_error) ? rows[i].rel_error : INFINITY);
  }
  t.write(log);
  t.write(file(dir, "gradcheck", tag, ".csv"));
  log << "max relative error " << format_real(worst) << " (tolerance " << format_real(cfg.grad_tol) << ")\n";
  return worst <= cfg.grad_tol ? kExitOk : kExitNumerical;
}

int cmd_optimize(const ProblemConfig& cfg, const Mesh& mesh, const std::filesystem::path& dir, const std::string& tag,
                 std::ostream& log) {
  Problem pb(mesh, cfg.params);
  const Targets targets = config_targets(pb, cfg);
  const OptimizationResult res = optimize(pb, targets, config_controls(pb, cfg), cfg.optimizer);
  CsvTable t({"iteration", "J_vorticity_L2", "J_velocity_L2", "J_rotation_L2", "J_density_L2", "J_g1_S", "J_g2_S", "J_total",
              "projected_gradient_norm", "vi_residual", "projection_distance_S", "step"});
  for (const auto& r : res.history)
    t.add_row({static_cast<long long>(r.iteration), r.J.terms[0], r.J.terms[1], r.J.terms[2], r.J.terms[3],
               r.J.terms[4], r.J.terms[5], r.J.total, r.pg_norm, r.vi_residual, r.projection_distance, r.step});
  t.write(file(dir, "optim_history", tag, ".csv"));
  write_fields(pb, dir, tag, res.state.u, res.state.w, res.state.psi, &res.adjoint.lambda, &res.adjoint.phi);
  const auto& last = res.history.back();
  log << "optimize" << tag << ": " << res.reason << " after " << last.iteration << " iterations, J "
      << format_real(last.J.total) << ", VI residual " << format_real(last.vi_residual) << "\n";
  return kExitOk;
}

int cmd_penalty(const ProblemConfig& cfg, const Mesh& mesh, const std::filesystem::path& dir, const std::string& tag,
                std::ostream& log) {
  Problem pb(mesh, cfg.params);
  const Targets targets = config_targets(pb, cfg);
  const OptimizationResult res = optimize(pb, targets, config_controls(pb, cfg), cfg.optimizer);
  log << "anchor: " << res.reason << ", J " << format_real(res.history.back().J.total) << "\n";
  const PenaltyPathReport rep = penalty_path_experiment(pb, targets, anchor_from(res), res.controls, cfg.penalty);
  CsvTable t({"eps", "dist_u_H1", "dist_w_H1", "dist_g1_S", "dist_g2_S", "dist_total", "J_eps", "J", "J_anchor",
              "defect", "iterations", "stagnated", "sandwich"});
  RieszOperators riesz(pb);
  for (size_t i = 0; i < rep.entries.size(); ++i) {
    const auto& e = rep.entries[i];
    t.add_row({e.eps, e.dist_u, e.dist_w, e.dist_g1, e.dist_g2, e.distance(), e.J_eps, e.J, e.J_anchor, e.defect,
               static_cast<long long>(e.iterations), static_cast<long long>(e.stagnated),
               static_cast<long long>(e.sandwich)});
    const PenaltyMultipliers m = compute_penalty_multipliers(pb, riesz, e.minimizer, e.eps);
    write_fields(pb, dir, tag + "_eps" + std::to_string(i), e.minimizer.u, e.minimizer.w,
                 pb.stream().apply(e.minimizer.u), &m.lambda, &m.phi);
  }
  t.write(file(dir, "penalty_report", tag, ".csv"));
  log << "penalty" << tag << ": distances " << (rep.distances_monotone ? "nonincreasing" : "NOT nonincreasing")
      << ", sandwich " << (rep.sandwich ? "holds" : "violated") << "\n";
  return kExitOk;
}

int run_request(const RunRequest& req, std::ostream& log, std::ostream& err) {
  try {
    using Cmd = int (*)(const ProblemConfig&, const Mesh&, const std::filesystem::path&, const std::string&,
                        std::ostream&);
    Cmd cmd = nullptr;
    if (req.command == "solve") cmd = cmd_solve;
    else if (req.command == "gradcheck") cmd = cmd_gradcheck;
    else if (req.command == "optimize") cmd = cmd_optimize;
    else if (req.command == "penalty") cmd = cmd_penalty;
    else throw InputError("unknown command '" + req.command + "'");
    if (req.refine_levels && *req.refine_levels < 1) throw InputError("--refine needs a positive level count");

    const ProblemConfig cfg = load_problem_config(req.config);
    set_assembly_threads(cfg.threads);
    const std::filesystem::path dir = req.out ? *req.out : cfg.output;
    std::filesystem::create_directories(dir);
    if (!req.refine_levels) return cmd(cfg, config_mesh(cfg), dir, "", log);
    int code = kExitOk;
    for (int k = 0; k < *req.refine_levels; ++k) {
      const Mesh mesh = config_mesh(cfg, k);
      code = std::max(code, cmd(cfg, mesh, dir, h_tag(mesh), log));
    }
    return code;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace mpoc
