#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "switchtime/benchmarks.hpp"
#include "switchtime/cli.hpp"
#include "switchtime/problem_io.hpp"

using namespace swto;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("switchtime_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json small_problem() {
  return json::parse(R"({
    "n_x": 2,
    "modes": [{"A": [[-1, 0], [1, 2]]}, {"A": [[1, 1], [1, -2]]}],
    "x0": [1, 1], "Q": [[1, 0], [0, 1]], "E": [[0, 0], [0, 0]],
    "T": 1, "n_grid": 2
  })");
}

std::string error_path(const json& j) {
  try {
    parse_problem(j);
  } catch (const ProblemFormatError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST(ProblemIo, ParsesMinimalProblem) {
  const auto def = parse_problem(small_problem());
  EXPECT_EQ(def.modes.size(), 2u);
  EXPECT_FALSE(def.lb.has_value());
  const auto p = build_problem(def);
  EXPECT_TRUE(p.is_linear());
  EXPECT_EQ(p.num_intervals(), 2);
}

TEST(ProblemIo, ReportsFieldPaths) {
  json j = small_problem();
  j.erase("Q");
  EXPECT_EQ(error_path(j), "/Q");

  j = small_problem();
  j["modes"][1]["A"][0][1] = "x";
  EXPECT_EQ(error_path(j), "/modes/1/A/0/1");

  j = small_problem();
  j["modes"][0] = {{"pendulum", {{"g", 9.81}}}};
  EXPECT_EQ(error_path(j), "/modes/0");

  j = small_problem();
  j["modes"][0] = {{"lotka_volterra", {{"c1", 0.4}, {"u", 1}}}};
  EXPECT_EQ(error_path(j), "/modes/0/lotka_volterra/c2");

  j = small_problem();
  j["x0"] = {1, 2, 3};
  EXPECT_EQ(error_path(j), "/x0");

  j = small_problem();
  j["n_grid"] = 1;
  EXPECT_EQ(error_path(j), "/n_grid");

  j = small_problem();
  j["reference"] = {{"r0", {1}}, {"tracked", {5}}};
  EXPECT_EQ(error_path(j), "/reference/tracked/0");
}

TEST(ProblemIo, UnboundedUpperBoundsAreNull) {
  json j = small_problem();
  j["lb"] = {0.1, 0.0};
  j["ub"] = {nullptr, 0.8};
  const auto def = parse_problem(j);
  EXPECT_TRUE(std::isinf((*def.ub)[0]));
  EXPECT_EQ(to_json(def)["ub"][0], nullptr);
}

TEST(ProblemIo, BuiltinRoundTripIsBitwise) {
  const auto dir = temp_dir("roundtrip");
  for (const auto& name : builtin_names()) {
    const auto def = builtin_definition(name);
    save_problem_file(def, dir / (name + ".json"));
    const auto back = load_problem_file(dir / (name + ".json"));
    SolverOptions o;
    o.max_iter = builtin_max_iter(name);
    o.compute_oracle = false;
    const auto a = solve(build_problem(def), {}, o);
    const auto b = solve(build_problem(back), {}, o);
    EXPECT_EQ(a.tau_star, b.tau_star) << name;
    EXPECT_EQ(a.J_final, b.J_final) << name;
  }
}

TEST(ProblemIo, DeltaFileForms) {
  const auto dir = temp_dir("delta");
  std::ofstream(dir / "a.json") << "[0.25, 0.75]";
  std::ofstream(dir / "b.json") << R"({"delta": [0.5, 0.5]})";
  std::ofstream(dir / "c.json") << R"({"tau": [0.5]})";
  EXPECT_EQ(load_delta_file(dir / "a.json")[1], 0.75);
  EXPECT_EQ(load_delta_file(dir / "b.json")[0], 0.5);
  EXPECT_THROW(load_delta_file(dir / "c.json"), ProblemFormatError);
  EXPECT_THROW(load_delta_file(dir / "missing.json"), std::runtime_error);
}

TEST(Cli, RunWritesReportAndTrajectory) {
  RunConfig cfg;
  cfg.builtin = "unstable-linear";
  cfg.out_dir = temp_dir("run");
  std::ostringstream log;
  const auto res = run(cfg, log);
  EXPECT_EQ(res.exit_code, 0);
  std::ifstream in(cfg.out_dir / "report.json");
  const json report = json::parse(in);
  EXPECT_EQ(report["termination"], "converged");
  EXPECT_EQ(report["tau_star"].size(), 5u);
  EXPECT_LE(report["linearization_gap"].get<double>(), 1e-8);

  std::ifstream csv(cfg.out_dir / "trajectory.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "t,x1,x2,mode,running_cost");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_GE(rows, 500);
}

TEST(Cli, TrackingColumnsAreNamed) {
  RunConfig cfg;
  cfg.builtin = "tank";
  cfg.max_iter = 1;
  cfg.out_dir = temp_dir("tank");
  std::ostringstream log;
  run(cfg, log);
  std::ifstream csv(cfg.out_dir / "trajectory.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "t,x1,x2,r1,mode,running_cost");
}

TEST(Cli, SeedDeltaMustMatch) {
  const auto dir = temp_dir("seed");
  std::ofstream(dir / "seed.json") << "[0.5, 0.5]";
  RunConfig cfg;
  cfg.builtin = "unstable-linear";
  cfg.seed_delta = dir / "seed.json";
  cfg.out_dir = dir;
  std::ostringstream log;
  EXPECT_THROW(run(cfg, log), ProblemFormatError);
}

TEST(Cli, ConfigErrors) {
  RunConfig cfg;
  EXPECT_THROW(resolve_definition(cfg), std::invalid_argument);
  cfg.builtin = "unknown";
  EXPECT_THROW(resolve_definition(cfg), std::invalid_argument);
  cfg.builtin = "fishing";
  cfg.n_grid = 1;
  EXPECT_THROW(resolve_definition(cfg), std::invalid_argument);
  cfg.n_grid = 150;
  EXPECT_EQ(resolve_definition(cfg).n_grid, 150);
  EXPECT_EQ(solver_options(cfg).max_iter, 20);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(exit_code(Termination::converged), 0);
  EXPECT_EQ(exit_code(Termination::max_iter), 0);
  EXPECT_NE(exit_code(Termination::line_search_failure), 0);
  EXPECT_NE(exit_code(Termination::overflow), 0);
}

TEST(Cli, LinearSweepHasNoGap) {
  RunConfig cfg;
  cfg.builtin = "unstable-linear";
  std::ostringstream log;
  const auto rows = sweep_grid(cfg, {2, 10, 100}, log);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_LE(r.delta_J_percent, 1e-6);
    EXPECT_NEAR(r.J_linearized, rows[0].J_linearized, 1e-9 * rows[0].J_linearized);
  }
  const auto path = temp_dir("sweep") / "sweep.csv";
  write_sweep_csv(rows, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "n_grid,J_oracle,J_linearized,delta_J_percent,n_J_eval,time,termination");
}
