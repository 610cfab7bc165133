#include "mpoc/cli.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace mpoc;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mpoc_cli_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& cmd, const std::string& cfg, const std::filesystem::path& out, std::string* err = nullptr,
        std::optional<int> refine = {}) {
  std::ostringstream log, e;
  const int code = run_request({cmd, fixtures::sample(cfg), refine, out}, log, e);
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST(Cli, ZeroDataSolveReportsOneIteration) {
  const auto dir = scratch("zero");
  ASSERT_EQ(run("solve", "zero_data.cfg", dir), kExitOk);
  std::istringstream csv(slurp(dir / "state_report.csv"));
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "iteration,update_norm_H1,energy_residual_rel,theta_bound,solution_norm_H1");
  EXPECT_EQ(row.substr(0, 2), "1,");
  EXPECT_FALSE(std::getline(csv, extra));
  for (const char* f : {"u.vtk", "w.vtk", "rho.vtk", "psi.vtk"}) EXPECT_TRUE(std::filesystem::exists(dir / f));
}

TEST(Cli, MissingMeshIsAnInputError) {
  const auto dir = scratch("missing");
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "bad.cfg";
  std::ofstream(cfg) << "[mesh]\nfile = no_such_file.mesh\n[boundary]\nu0_x = 0\nu0_y = 0\nw0 = 0\nrho0 = 1\n";
  std::ostringstream log, err;
  EXPECT_EQ(run_request({"solve", cfg, {}, dir}, log, err), kExitInput);
  EXPECT_NE(err.str().find("no_such_file.mesh"), std::string::npos);
  EXPECT_EQ(run_request({"bogus", cfg, {}, dir}, log, err), kExitInput);
  EXPECT_EQ(run_request({"solve", dir / "absent.cfg", {}, dir}, log, err), kExitInput);
}

TEST(Cli, RefinementSeriesWritesTaggedReports) {
  const auto dir = scratch("refine");
  ASSERT_EQ(run("solve", "zero_data.cfg", dir, nullptr, 3), kExitOk);
  int reports = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().filename().string().rfind("state_report_h", 0) == 0) ++reports;
  EXPECT_EQ(reports, 3);
}

TEST(Cli, GradcheckPassesAndReportsAreByteIdentical) {
  const auto a = scratch("grad_a"), b = scratch("grad_b");
  ASSERT_EQ(run("gradcheck", "channel.cfg", a), kExitOk);
  ASSERT_EQ(run("gradcheck", "channel.cfg", b), kExitOk);
  EXPECT_EQ(slurp(a / "gradcheck.csv"), slurp(b / "gradcheck.csv"));
}

TEST(Cli, OptimizeAndPenaltyWriteOutputs) {
  const auto dir = scratch("opt");
  ASSERT_EQ(run("optimize", "inverse_crime.cfg", dir), kExitOk);
  EXPECT_TRUE(std::filesystem::exists(dir / "optim_history.csv"));
  for (const char* f : {"lambda.vtk", "phi.vtk"}) EXPECT_TRUE(std::filesystem::exists(dir / f));
  ASSERT_EQ(run("penalty", "inverse_crime.cfg", dir), kExitOk);
  std::istringstream csv(slurp(dir / "penalty_report.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
