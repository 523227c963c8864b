#include "switchtime/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "switchtime/benchmarks.hpp"

namespace swto {

using nlohmann::json;

namespace {

json to_array(const Vector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

std::string problem_name(const RunConfig& cfg) {
  if (cfg.builtin) return *cfg.builtin;
  return cfg.problem_file ? cfg.problem_file->string() : std::string{};
}

std::optional<Intervals> seed(const RunConfig& cfg, const SwitchedProblem& p) {
  if (!cfg.seed_delta) return std::nullopt;
  const Vector d = load_delta_file(*cfg.seed_delta);
  if (d.size() != p.num_intervals()) {
    throw ProblemFormatError("/delta", "expected " + std::to_string(p.num_intervals()) +
                                           " intervals, got " + std::to_string(d.size()));
  }
  return Intervals(d);
}

std::optional<double> relative_gap(const SolveReport& rep) {
  if (!rep.J_oracle) return std::nullopt;
  const double diff = std::abs(*rep.J_oracle - rep.J_final);
  return *rep.J_oracle != 0.0 ? diff / std::abs(*rep.J_oracle) : diff;
}

}  // namespace

ProblemDefinition resolve_definition(const RunConfig& cfg) {
  if (cfg.builtin.has_value() == cfg.problem_file.has_value()) {
    throw std::invalid_argument("exactly one of a builtin name or a problem file is required");
  }
  ProblemDefinition def =
      cfg.builtin ? builtin_definition(*cfg.builtin) : load_problem_file(*cfg.problem_file);
  if (cfg.n_grid) {
    if (*cfg.n_grid < 2) throw std::invalid_argument("n_grid must be at least 2");
    def.n_grid = *cfg.n_grid;
  }
  return def;
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions opts;
  opts.tol = cfg.tol;
  if (cfg.max_iter) {
    opts.max_iter = *cfg.max_iter;
  } else if (cfg.builtin) {
    opts.max_iter = builtin_max_iter(*cfg.builtin);
  }
  validate(opts);
  return opts;
}

int exit_code(Termination t) {
  switch (t) {
    case Termination::converged:
    case Termination::max_iter: return 0;
    case Termination::line_search_failure: return 2;
    case Termination::overflow: return 3;
  }
  return 1;
}

json report_to_json(const SolveReport& rep, std::optional<double> gap,
                    const std::string& problem_name, int n_grid) {
  json j;
  j["problem"] = problem_name;
  j["n_grid"] = n_grid;
  j["delta_star"] = to_array(rep.delta_star);
  j["tau_star"] = to_array(rep.tau_star);
  j["J_final"] = rep.J_final;
  j["J_oracle"] = rep.J_oracle ? json(*rep.J_oracle) : json(nullptr);
  j["linearization_gap"] = gap ? json(*gap) : json(nullptr);
  j["J_history"] = rep.J_history;
  j["optimality"] = rep.optimality;
  j["iterations"] = rep.iterations;
  j["n_cost_evaluations"] = rep.n_cost_evaluations;
  j["wall_time"] = rep.wall_time;
  j["termination"] = to_string(rep.termination);
  if (!rep.message.empty()) j["message"] = rep.message;
  return j;
}

void write_trajectory_csv(const Trajectory& traj, int n_x, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  out << "t";
  for (Eigen::Index k = 0; k < n; ++k) {
    out << ',' << (k < n_x ? "x" + std::to_string(k + 1) : "r" + std::to_string(k - n_x + 1));
  }
  out << ",mode,running_cost\n";
  out << std::setprecision(17);
  for (std::size_t s = 0; s < traj.size(); ++s) {
    out << traj.times[s];
    for (Eigen::Index k = 0; k < n; ++k) out << ',' << traj.states[s][k];
    out << ',' << traj.modes[s] << ',' << traj.running_cost[s] << '\n';
  }
}

RunResult run(const RunConfig& cfg, std::ostream& log) {
  const ProblemDefinition def = resolve_definition(cfg);
  const SwitchedProblem p = build_problem(def);
  const SolverOptions opts = solver_options(cfg);

  RunResult res;
  res.report = solve(p, seed(cfg, p), opts);
  res.gap = relative_gap(res.report);
  res.exit_code = exit_code(res.report.termination);

  std::filesystem::create_directories(cfg.out_dir);
  if (cfg.write_report) {
    const auto path = cfg.out_dir / "report.json";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(17)
        << report_to_json(res.report, res.gap, problem_name(cfg), def.n_grid).dump(2) << '\n';
  }
  if (cfg.write_trajectory && res.report.termination != Termination::overflow) {
    const Trajectory traj =
        integrate(p, Intervals(res.report.delta_star), {}, cfg.trajectory_samples);
    write_trajectory_csv(traj, def.n_x, cfg.out_dir / "trajectory.csv");
  }

  log << "termination: " << to_string(res.report.termination) << " after "
      << res.report.iterations << " iterations, " << res.report.n_cost_evaluations
      << " cost evaluations\n";
  log << std::setprecision(8) << "J = " << res.report.J_final;
  if (res.report.J_oracle) log << ", J_oracle = " << *res.report.J_oracle;
  log << "\ntau* =";
  for (Eigen::Index k = 0; k < res.report.tau_star.size(); ++k) log << ' ' << res.report.tau_star[k];
  log << '\n';
  return res;
}

std::vector<SweepRow> sweep_grid(const RunConfig& cfg, const std::vector<int>& grid_sizes,
                                 std::ostream& log) {
  const SolverOptions opts = solver_options(cfg);
  std::vector<SweepRow> rows;
  for (int n : grid_sizes) {
    RunConfig c = cfg;
    c.n_grid = n;
    const SwitchedProblem p = build_problem(resolve_definition(c));
    const SolveReport rep = solve(p, seed(c, p), opts);
    SweepRow row;
    row.n_grid = n;
    row.J_linearized = rep.J_final;
    row.J_oracle = rep.J_oracle.value_or(std::nan(""));
    row.delta_J_percent = 100.0 * relative_gap(rep).value_or(std::nan(""));
    row.n_cost_evaluations = rep.n_cost_evaluations;
    row.time = rep.wall_time;
    row.termination = rep.termination;
    log << "n_grid " << n << ": J = " << std::setprecision(8) << row.J_linearized
        << ", J_oracle = " << row.J_oracle << ", dJ = " << row.delta_J_percent << "%\n";
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "n_grid,J_oracle,J_linearized,delta_J_percent,n_J_eval,time,termination\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.n_grid << ',' << r.J_oracle << ',' << r.J_linearized << ',' << r.delta_J_percent
        << ',' << r.n_cost_evaluations << ',' << r.time << ',' << to_string(r.termination)
        << '\n';
  }
}

}  // namespace swto
