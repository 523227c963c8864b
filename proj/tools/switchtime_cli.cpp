#include <CLI11.hpp>

#include <iostream>

#include "switchtime/benchmarks.hpp"
#include "switchtime/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Switching-time optimization for switched systems"};
  swto::RunConfig cfg;
  std::string builtin;
  std::string problem;
  std::string out = ".";
  std::string seed;
  std::string export_path;
  std::vector<int> sweep;
  int n_grid = 0;
  int max_iter = 0;

  auto* b = app.add_option("--builtin", builtin, "Bundled problem")
                ->check(CLI::IsMember(swto::builtin_names()));
  auto* f = app.add_option("--problem", problem, "Problem JSON file")->check(CLI::ExistingFile);
  b->excludes(f);
  app.add_option("--n-grid", n_grid, "Background grid size")->check(CLI::Range(2, 1000000));
  app.add_option("--max-iter", max_iter, "Outer iteration budget")->check(CLI::PositiveNumber);
  app.add_option("--tol", cfg.tol, "First-order optimality tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory");
  app.add_option("--sweep", sweep, "Solve for each grid size and write sweep.csv")
      ->delimiter(',')
      ->check(CLI::Range(2, 1000000));
  app.add_option("--seed-delta", seed, "Initial intervals (JSON array)")
      ->check(CLI::ExistingFile);
  app.add_option("--export-problem", export_path, "Write the problem as JSON and exit");
  CLI11_PARSE(app, argc, argv);

  if (builtin.empty() && problem.empty()) {
    std::cerr << "error: one of --builtin or --problem is required\n";
    return 1;
  }
  if (!builtin.empty()) cfg.builtin = builtin;
  if (!problem.empty()) cfg.problem_file = problem;
  if (n_grid > 0) cfg.n_grid = n_grid;
  if (max_iter > 0) cfg.max_iter = max_iter;
  if (!seed.empty()) cfg.seed_delta = seed;
  cfg.out_dir = out;

  try {
    if (!export_path.empty()) {
      swto::save_problem_file(swto::resolve_definition(cfg), export_path);
      return 0;
    }
    if (!sweep.empty()) {
      const auto rows = swto::sweep_grid(cfg, sweep, std::cout);
      std::filesystem::create_directories(cfg.out_dir);
      swto::write_sweep_csv(rows, cfg.out_dir / "sweep.csv");
      for (const auto& r : rows) {
        if (swto::exit_code(r.termination) != 0) return swto::exit_code(r.termination);
      }
      return 0;
    }
    return swto::run(cfg, std::cout).exit_code;
  } catch (const swto::ProblemFormatError& e) {
    std::cerr << "error: problem file " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}
