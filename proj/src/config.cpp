#include "mpoc/config.hpp"

#include "mpoc/objective.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace mpoc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& text, const std::string& where) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || trim(end) != "" || errno == ERANGE) throw InputError(where + ": not a number: '" + text + "'");
  return v;
}

const std::vector<std::string> kXY{"x", "y"};
const std::vector<std::string> kXYS{"x", "y", "s"};

const std::vector<std::string> kKnownKeys{
    "mesh.file",         "mesh.refine",          "model.mu1",          "model.mu2",          "model.mur",
    "model.alpha",       "model.f_x",            "model.f_y",          "model.g",            "boundary.u0_x",
    "boundary.u0_y",     "boundary.w0",          "boundary.rho0",      "targets.mode",       "targets.u_x",
    "targets.u_y",       "targets.w",            "targets.rho",        "targets.true_g1_x",  "targets.true_g1_y",
    "targets.true_g2",   "objective.beta1",      "objective.beta2",    "objective.beta3",    "objective.beta4",
    "objective.beta5",   "objective.beta6",      "controls.g1_x",      "controls.g1_y",      "controls.g2",
    "controls.g1_lower", "controls.g1_upper",    "controls.g2_lower",  "controls.g2_upper",  "solver.tol",
    "solver.max_iter",   "solver.relaxation",    "optimizer.max_outer", "optimizer.tol_vi",  "optimizer.step0",
    "optimizer.shrink",  "optimizer.armijo",     "optimizer.competitors", "penalty.eps",     "penalty.max_iter",
    "penalty.tol",       "gradcheck.directions", "gradcheck.h",        "gradcheck.tolerance", "run.seed",
    "run.threads",       "run.output"};

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  std::string line, section;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ": line " + std::to_string(no);
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw InputError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(where + ": expected 'key = value'");
    if (section.empty()) throw InputError(where + ": key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InputError(where + ": empty key");
    auto& sec = cfg.values_[section];
    if (sec.count(key)) throw InputError(where + ": duplicate key '" + section + "." + key + "'");
    sec[key] = value;
    cfg.lines_[section + "." + key] = no;
  }
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto it = values_.find(section);
  return it != values_.end() && it->second.count(key) > 0;
}

const std::string& ConfigFile::get(const std::string& section, const std::string& key) const {
  if (!has(section, key)) throw InputError(source_ + ": missing required key '" + key + "' in [" + section + "]");
  return values_.at(section).at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key, const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::real(const std::string& section, const std::string& key, double fallback) const {
  if (!has(section, key)) return fallback;
  return parse_real(get(section, key), source_ + ": " + section + "." + key);
}

long long ConfigFile::integer(const std::string& section, const std::string& key, long long fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& text = get(section, key);
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw InputError(source_ + ": " + section + "." + key + ": not an integer: '" + text + "'");
  return v;
}

std::vector<double> ConfigFile::real_list(const std::string& section, const std::string& key,
                                          const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  std::stringstream ss(get(section, key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), source_ + ": " + section + "." + key));
  return out;
}

void ConfigFile::check_known(const std::vector<std::string>& known) const {
  const std::set<std::string> ok(known.begin(), known.end());
  for (const auto& [section, keys] : values_)
    for (const auto& kv : keys) {
      const std::string full = section + "." + kv.first;
      if (!ok.count(full))
        throw InputError(source_ + ": line " + std::to_string(lines_.at(full)) + ": unknown key '" + full + "'");
    }
}

ProblemConfig parse_problem_config(std::istream& in, const std::string& source, const std::filesystem::path& base_dir) {
  const ConfigFile c = ConfigFile::parse(in, source);
  c.check_known(kKnownKeys);
  ProblemConfig p;
  auto expr = [&](const std::string& sec, const std::string& key, const std::vector<std::string>& vars,
                  const std::string& fallback) {
    try {
      return Expression::parse(c.get_or(sec, key, fallback), vars);
    } catch (const InputError& e) {
      throw InputError(source + ": " + sec + "." + key + ": " + e.what());
    }
  };
  auto required_expr = [&](const std::string& sec, const std::string& key, const std::vector<std::string>& vars) {
    c.get(sec, key);
    return expr(sec, key, vars, "0");
  };

  std::filesystem::path mesh = c.get("mesh", "file");
  p.mesh_path = mesh.is_absolute() ? mesh : base_dir / mesh;
  p.refine = static_cast<int>(c.integer("mesh", "refine", 0));
  if (p.refine < 0 || p.refine > 8) throw InputError(source + ": mesh.refine must lie in [0, 8]");

  p.params.mu1 = c.real("model", "mu1", 1.0);
  p.params.mu2 = c.real("model", "mu2", 1.0);
  p.params.mur = c.real("model", "mur", 0.5);
  p.params.alpha = c.real("model", "alpha", 0.0);
  p.f_x = expr("model", "f_x", kXY, "0");
  p.f_y = expr("model", "f_y", kXY, "0");
  p.g = expr("model", "g", kXY, "0");
  p.u0_x = required_expr("boundary", "u0_x", kXYS);
  p.u0_y = required_expr("boundary", "u0_y", kXYS);
  p.w0 = required_expr("boundary", "w0", kXYS);
  p.rho0 = required_expr("boundary", "rho0", kXYS);
  {
    const Expression fx = p.f_x, fy = p.f_y, g = p.g, ux = p.u0_x, uy = p.u0_y, w0 = p.w0, r0 = p.rho0;
    p.params.f = [fx, fy](const Vec2& x) { return Vec2(fx({x.x(), x.y()}), fy({x.x(), x.y()})); };
    p.params.g = [g](const Vec2& x) { return g({x.x(), x.y()}); };
    p.params.u0 = [ux, uy](const Vec2& x, double s) {
      return Vec2(ux({x.x(), x.y(), s}), uy({x.x(), x.y(), s}));
    };
    p.params.w0 = [w0](const Vec2& x, double s) { return w0({x.x(), x.y(), s}); };
    p.params.rho0 = [r0](const Vec2& x, double s) { return r0({x.x(), x.y(), s}); };
  }

  const std::string mode = c.get_or("targets", "mode", "expressions");
  if (mode == "expressions") {
    p.target_mode = TargetMode::Expressions;
  } else if (mode == "inverse_crime") {
    p.target_mode = TargetMode::InverseCrime;
    p.true_g1_x = required_expr("targets", "true_g1_x", kXY);
    p.true_g1_y = required_expr("targets", "true_g1_y", kXY);
    p.true_g2 = required_expr("targets", "true_g2", kXY);
  } else {
    throw InputError(source + ": targets.mode must be 'expressions' or 'inverse_crime'");
  }
  p.ud_x = expr("targets", "u_x", kXY, "0");
  p.ud_y = expr("targets", "u_y", kXY, "0");
  p.wd = expr("targets", "w", kXY, "0");
  p.rhod = expr("targets", "rho", kXY, "0");

  for (int i = 0; i < 6; ++i)
    p.params.beta[i] = c.real("objective", "beta" + std::to_string(i + 1), p.params.beta[i]);
  p.params.validate();
  if (!(p.params.beta[4] > 0.0) || !(p.params.beta[5] > 0.0))
    throw InputError(source + ": objective.beta5 and objective.beta6 must be positive");

  p.g1_x = expr("controls", "g1_x", kXY, "0");
  p.g1_y = expr("controls", "g1_y", kXY, "0");
  p.g2 = expr("controls", "g2", kXY, "0");
  p.g1_lower = c.real("controls", "g1_lower", p.g1_lower);
  p.g1_upper = c.real("controls", "g1_upper", p.g1_upper);
  p.g2_lower = c.real("controls", "g2_lower", p.g2_lower);
  p.g2_upper = c.real("controls", "g2_upper", p.g2_upper);
  if (!(p.g1_lower <= p.g1_upper) || !(p.g2_lower <= p.g2_upper))
    throw InputError(source + ": control lower bounds must not exceed upper bounds");

  p.solver.tol = c.real("solver", "tol", p.solver.tol);
  p.solver.max_iter = static_cast<int>(c.integer("solver", "max_iter", p.solver.max_iter));
  p.solver.relaxation = c.real("solver", "relaxation", p.solver.relaxation);
  if (!(p.solver.tol > 0.0) || p.solver.max_iter < 1 || !(p.solver.relaxation > 0.0 && p.solver.relaxation <= 1.0))
    throw InputError(source + ": solver options out of range (tol > 0, max_iter >= 1, 0 < relaxation <= 1)");

  p.optimizer.max_outer = static_cast<int>(c.integer("optimizer", "max_outer", p.optimizer.max_outer));
  p.optimizer.tol_vi = c.real("optimizer", "tol_vi", p.optimizer.tol_vi);
  p.optimizer.step0 = c.real("optimizer", "step0", p.optimizer.step0);
  p.optimizer.shrink = c.real("optimizer", "shrink", p.optimizer.shrink);
  p.optimizer.armijo = c.real("optimizer", "armijo", p.optimizer.armijo);
  p.optimizer.competitors = static_cast<int>(c.integer("optimizer", "competitors", p.optimizer.competitors));
  if (p.optimizer.max_outer < 0 || !(p.optimizer.step0 > 0.0) ||
      !(p.optimizer.shrink > 0.0 && p.optimizer.shrink < 1.0) || p.optimizer.competitors < 1)
    throw InputError(source + ": optimizer options out of range");

  p.penalty.eps = c.real_list("penalty", "eps", p.penalty.eps);
  p.penalty.max_iter = static_cast<int>(c.integer("penalty", "max_iter", p.penalty.max_iter));
  p.penalty.tol = c.real("penalty", "tol", p.penalty.tol);

  p.grad_directions = static_cast<int>(c.integer("gradcheck", "directions", p.grad_directions));
  p.grad_h = c.real("gradcheck", "h", p.grad_h);
  p.grad_tol = c.real("gradcheck", "tolerance", p.grad_tol);
  if (p.grad_directions < 1 || !(p.grad_h > 0.0)) throw InputError(source + ": gradcheck options out of range");

  const long long seed = c.integer("run", "seed", 42);
  if (seed < 0) throw InputError(source + ": run.seed must be nonnegative");
  p.seed = static_cast<std::uint64_t>(seed);
  p.optimizer.seed = p.seed;
  p.optimizer.state = p.solver;
  p.threads = static_cast<int>(c.integer("run", "threads", 1));
  if (p.threads < 1) throw InputError(source + ": run.threads must be at least 1");
  p.output = c.get_or("run", "output", "out");
  return p;
}

ProblemConfig load_problem_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  return parse_problem_config(in, path.string(), path.parent_path());
}

Mesh config_mesh(const ProblemConfig& cfg, int extra_refine) {
  Mesh m = load_mesh(cfg.mesh_path.string());
  for (int i = 0; i < cfg.refine + extra_refine; ++i) m = refine_uniform(m);
  return m;
}

ControlPair config_controls(const Problem& pb, const ProblemConfig& cfg) {
  const Expression gx = cfg.g1_x, gy = cfg.g1_y, g2 = cfg.g2;
  return pb.make_controls([&](const Vec2& x) { return Vec2(gx({x.x(), x.y()}), gy({x.x(), x.y()})); },
                          [&](const Vec2& x) { return g2({x.x(), x.y()}); }, cfg.g1_lower, cfg.g1_upper, cfg.g2_lower,
                          cfg.g2_upper);
}

Targets config_targets(const Problem& pb, const ProblemConfig& cfg) {
  if (cfg.target_mode == TargetMode::InverseCrime) {
    ControlPair truth = pb.make_controls(
        [&](const Vec2& x) { return Vec2(cfg.true_g1_x({x.x(), x.y()}), cfg.true_g1_y({x.x(), x.y()})); },
        [&](const Vec2& x) { return cfg.true_g2({x.x(), x.y()}); }, cfg.g1_lower, cfg.g1_upper, cfg.g2_lower,
        cfg.g2_upper);
    truth = project_controls(pb, truth);
    StateSolution st = solve_state(pb, truth, cfg.solver);
    if (!st.converged) throw NumericalError("state solve at the inverse-crime controls failed: " + st.reason);
    return targets_from_state(pb, st);
  }
  return Targets::from_functions(
      pb.spaces(), [&](const Vec2& x) { return Vec2(cfg.ud_x({x.x(), x.y()}), cfg.ud_y({x.x(), x.y()})); },
      [&](const Vec2& x) { return cfg.wd({x.x(), x.y()}); }, [&](const Vec2& x) { return cfg.rhod({x.x(), x.y()}); });
}

}  // namespace mpoc
