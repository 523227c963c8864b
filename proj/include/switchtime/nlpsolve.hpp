// Outer optimization loop over the switching intervals.
//
// Every iteration re-linearizes the problem at the current intervals,
// evaluates J, its gradient and Hessian from the shared precomputations and
// takes one step of a second-order method on
//
//   min J(delta)  s.t.  1' delta = T,  lb <= delta <= ub.
//
// The builtin method is an active-set, eigenvalue-regularized Newton method
// with a projected backtracking line search. Alternatively the callbacks in
// NlpInterface can be handed to any external NLP solver.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "switchtime/problem.hpp"
#include "switchtime/sensitivity.hpp"

namespace swto {

enum class Termination { converged, max_iter, line_search_failure, overflow };

std::string to_string(Termination t);

/// Callbacks and linear constraint data of the switching-time NLP. The
/// three functions are pure in delta; evaluations at the same point share
/// one linearization.
struct NlpInterface {
  int num_variables = 0;
  std::function<double(const Vector&)> cost;
  std::function<Vector(const Vector&)> gradient;
  /// Row-major lower triangle of H: (0,0), (1,0), (1,1), (2,0), ...
  std::function<std::vector<double>(const Vector&)> hessian_lower;
  Vector constraint_row;  // all ones
  double constraint_rhs = 0.0;
  Vector lower_bounds;
  Vector upper_bounds;
  /// Number of linearized evaluations performed so far.
  std::function<int()> evaluation_count;
};

struct LineSearchOptions {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 40;
};

enum class SolverMode { builtin, external };

/// Drives an external solver from delta0; returns its final iterate.
using ExternalDriver = std::function<Vector(const NlpInterface&, const Vector& delta0)>;

struct SolverOptions {
  int max_iter = 100;
  double tol = 1e-8;
  double hessian_regularization = 1e-6;
  LineSearchOptions line_search;
  SolverMode mode = SolverMode::builtin;
  ExternalDriver external;
  /// Replace the Hessian with the identity (projected gradient method).
  bool identity_hessian = false;
  /// Integrate the true dynamics at the solution to report J_oracle.
  bool compute_oracle = true;
  EvaluatorOptions evaluator;
};

/// Throws std::invalid_argument when tol <= 0 or max_iter < 1.
void validate(const SolverOptions& opts);

struct SolveReport {
  Vector delta_star;
  Vector tau_star;  // interior switching times tau_1..tau_N
  std::vector<double> J_history;  // one entry per accepted iterate
  double J_final = 0.0;
  std::optional<double> J_oracle;
  double optimality = 0.0;
  int iterations = 0;
  int n_cost_evaluations = 0;
  double wall_time = 0.0;  // seconds
  Termination termination = Termination::max_iter;
  std::string message;
};

/// Projected-gradient residual max|P(-grad)| over the feasible directions
/// at delta: sum of the direction is zero and coordinates sitting on a bound
/// may only move inward.
double first_order_optimality(const Vector& delta, const Vector& grad,
                              const SwitchedProblem& p, double active_tol = 1e-10);

NlpInterface make_nlp_interface(const Evaluator& evaluator);

SolveReport solve(const SwitchedProblem& p, std::optional<Intervals> delta0 = {},
                  const SolverOptions& opts = {});

}  // namespace swto
