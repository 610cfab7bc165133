#include "mpoc/config.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mpoc;

namespace {

ProblemConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_problem_config(in, "test.cfg", MPOC_SAMPLES_DIR);
}

const std::string kMinimal =
    "[mesh]\nfile = unit_square.mesh\n[boundary]\nu0_x = -4*s*(1-s)\nu0_y = 0\nw0 = 0\nrho0 = 1 + s\n";

}  // namespace

TEST(ConfigFile, SectionsCommentsAndLists) {
  std::istringstream in("# top\n[a]\nk = 1 # trailing\nlist = 1, 1e-2 ,1e-4\n[b]\nname = hello world\n");
  const ConfigFile c = ConfigFile::parse(in, "x");
  EXPECT_EQ(c.integer("a", "k", 0), 1);
  EXPECT_EQ(c.get("b", "name"), "hello world");
  EXPECT_EQ(c.real_list("a", "list", {}), (std::vector<double>{1, 1e-2, 1e-4}));
  EXPECT_DOUBLE_EQ(c.real("a", "missing", 3.5), 3.5);
  EXPECT_THROW(c.get("b", "missing"), InputError);
}

TEST(ConfigFile, Malformed) {
  for (const char* bad : {"k = 1\n", "[a\nk=1\n", "[a]\njunk\n", "[a]\nk=1\nk=2\n", "[a]\n= 3\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(ConfigFile::parse(in, "x"), InputError) << bad;
  }
}

TEST(ProblemConfig, Defaults) {
  const ProblemConfig p = parse(kMinimal);
  EXPECT_EQ(p.refine, 0);
  EXPECT_EQ(p.seed, 42u);
  EXPECT_EQ(p.optimizer.seed, 42u);
  EXPECT_EQ(p.target_mode, TargetMode::Expressions);
  EXPECT_EQ(p.penalty.eps, (std::vector<double>{1, 1e-2, 1e-4}));
  EXPECT_DOUBLE_EQ(p.params.u0(Vec2(0, 0.5), 0.5).x(), -1.0);
  EXPECT_DOUBLE_EQ(p.params.rho0(Vec2(0, 0), 0.25), 1.25);
}

TEST(ProblemConfig, Rejections) {
  EXPECT_THROW(parse("[mesh]\nfile = unit_square.mesh\n"), InputError);                 // missing boundary data
  EXPECT_THROW(parse(kMinimal + "[model]\nmu1 = -1\n"), InputError);                     // viscosity
  EXPECT_THROW(parse(kMinimal + "[objective]\nbeta5 = 0\n"), InputError);                 // beta5 > 0
  EXPECT_THROW(parse(kMinimal + "[model]\nf_x = sin(\n"), InputError);                    // bad expression
  EXPECT_THROW(parse(kMinimal + "[model]\nviscosity = 1\n"), InputError);                 // unknown key
  EXPECT_THROW(parse(kMinimal + "[targets]\nmode = inverse_crime\n"), InputError);        // true controls missing
  EXPECT_THROW(parse(kMinimal + "[controls]\ng1_lower = 1\ng1_upper = 0\n"), InputError);  // inverted box
  std::string zero_beta = kMinimal + "[objective]\n";
  for (int i = 1; i <= 6; ++i) zero_beta += "beta" + std::to_string(i) + " = 0\n";
  try {
    parse(zero_beta);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("zero"), std::string::npos) << e.what();
  }
}

TEST(ProblemConfig, SamplesLoad) {
  for (const char* name : {"channel.cfg", "constant_density.cfg", "zero_data.cfg", "inverse_crime.cfg"}) {
    const ProblemConfig p = load_problem_config(fixtures::sample(name));
    EXPECT_TRUE(std::filesystem::exists(p.mesh_path)) << name;
  }
}

TEST(ProblemConfig, InverseCrimeTargetsMatchTrueState) {
  ProblemConfig cfg = load_problem_config(fixtures::sample("inverse_crime.cfg"));
  cfg.refine = 1;
  const Problem pb(config_mesh(cfg), cfg.params);
  const Targets t = config_targets(pb, cfg);
  ControlPair truth = pb.make_controls(
      [&](const Vec2& x) { return Vec2(cfg.true_g1_x({x.x(), x.y()}), cfg.true_g1_y({x.x(), x.y()})); },
      [&](const Vec2& x) { return cfg.true_g2({x.x(), x.y()}); }, cfg.g1_lower, cfg.g1_upper, cfg.g2_lower,
      cfg.g2_upper);
  truth = project_controls(pb, truth);
  const StateSolution st = solve_state(pb, truth, cfg.solver);
  const ObjectiveBreakdown J = evaluate_J(pb, t, st, truth);
  EXPECT_LT(J.terms[1] + J.terms[2] + J.terms[3], 1e-20);
}
