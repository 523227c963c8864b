// Bundled benchmark problems and their nonlinear mode families.

#pragma once

#include <string>
#include <vector>

#include "switchtime/problem.hpp"
#include "switchtime/problem_io.hpp"

namespace swto {

/// x1' = x1 - x1 x2 - c1 x1 u,  x2' = -x2 + x1 x2 - c2 x2 u.
NonlinearMode lotka_volterra_mode(double c1, double c2, double u);

/// x1' = -sqrt(x1) + u,  x2' = sqrt(x1) - sqrt(x2).
NonlinearMode double_tank_mode(double u);

/// Two alternating unstable 2x2 modes, 6 intervals on [0, 1].
ProblemDefinition unstable_linear_definition();

/// Lotka-Volterra fishing: 9 intervals alternating u = 0, 1 on [0, 12],
/// tracking the constant reference [1, 1].
ProblemDefinition fishing_definition(int n_grid = 200);

/// Double tank: 16 intervals alternating u = 3, 2 on [0, 10], lower tank
/// tracking 3 - 0.5 t.
ProblemDefinition tank_definition(int n_grid = 100);

std::vector<std::string> builtin_names();

/// Throws std::invalid_argument for unknown names.
ProblemDefinition builtin_definition(const std::string& name);

/// Outer iteration budget used for each benchmark.
int builtin_max_iter(const std::string& name);

}  // namespace swto
