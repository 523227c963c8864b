// Front end shared by the switchtime executable and the tests.

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "switchtime/nlpsolve.hpp"
#include "switchtime/problem_io.hpp"
#include "switchtime/simulate.hpp"

namespace swto {

struct RunConfig {
  std::optional<std::string> builtin;
  std::optional<std::filesystem::path> problem_file;
  std::optional<int> n_grid;
  std::optional<int> max_iter;  // defaults to the benchmark budget, else 100
  double tol = 1e-8;
  std::filesystem::path out_dir = ".";
  std::optional<std::filesystem::path> seed_delta;
  bool write_report = true;
  bool write_trajectory = true;
  int trajectory_samples = 501;
};

/// Problem data selected by cfg, with the n_grid override applied.
ProblemDefinition resolve_definition(const RunConfig& cfg);

SolverOptions solver_options(const RunConfig& cfg);

struct RunResult {
  SolveReport report;
  std::optional<double> gap;  // |J_oracle - J_final| / |J_oracle|
  int exit_code = 0;
};

/// 0 for converged or max_iter, 2 for line search failure, 3 for overflow.
int exit_code(Termination t);

nlohmann::json report_to_json(const SolveReport& rep, std::optional<double> gap,
                              const std::string& problem_name, int n_grid);

/// Writes t, x1..xn, mode, running_cost. State columns past n_x hold the
/// reference signal and are named r1, r2, ...
void write_trajectory_csv(const Trajectory& traj, int n_x, const std::filesystem::path& path);

/// Solves and writes report.json and trajectory.csv into cfg.out_dir.
/// Throws on unreadable input or schema violations.
RunResult run(const RunConfig& cfg, std::ostream& log);

struct SweepRow {
  int n_grid = 0;
  double J_oracle = 0.0;
  double J_linearized = 0.0;
  double delta_J_percent = 0.0;
  int n_cost_evaluations = 0;
  double time = 0.0;
  Termination termination = Termination::max_iter;
};

std::vector<SweepRow> sweep_grid(const RunConfig& cfg, const std::vector<int>& grid_sizes,
                                 std::ostream& log);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace swto
