// Cost, gradient and Hessian of the grid-linearized switched problem.
//
// One pass over the partition linearizes every mode at the propagated grid
// states, exponentiates the Van Loan generators and propagates the state.
// From those shared blocks a backward recursion gives the cost-to-go
// matrices S, which in turn give
//
//   J       = x_0' S_0 x_0
//   dJ/d_i  = x_{i+1}' C_i x_{i+1},        C_i = Q + A' S_{i+1} + S_{i+1} A
//   H(l,i)  = 2 x_{l+1}' C_l Phi(tau_{l+1}, tau_{i+1}) A x_{i+1},   l >= i
//
// with A the linearization of the last subinterval of interval i. For
// nonlinear modes the state carries an extra constant component equal to 1
// so that the affine linearization becomes linear.

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

#include "switchtime/linalg.hpp"
#include "switchtime/problem.hpp"

namespace swto {

/// Propagated states above this norm abort the evaluation.
inline constexpr double kOverflowNorm = 1e15;

class PropagationOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linearization of one mode at x. Nonlinear modes expect the augmented
/// state (last entry 1) and return [[Jf, f - Jf x], [0, 0]]; linear modes
/// return A.
Matrix linearize_at(const ModeDynamics& mode, const Vector& x);

struct SubintervalBlock {
  Matrix A;  // linearization used on this subinterval
  Matrix E;  // e^{A d}
  Matrix M;  // int_0^d e^{A' s} Q e^{A s} ds
  double duration = 0.0;
};

struct LinearizationCache {
  std::vector<std::vector<SubintervalBlock>> blocks;  // [i][j], j = 0..n_i
  std::vector<std::vector<Vector>> grid_states;       // x_i^j, j = 0..n_i
  std::vector<Vector> switch_states;                  // x_0..x_{N+1}
  bool augmented = false;

  int num_intervals() const { return static_cast<int>(blocks.size()); }
  /// A of the last subinterval of interval i.
  const Matrix& last_linearization(int i) const { return blocks[i].back().A; }
};

/// S_i^j for every subinterval plus the terminal S_{N+1} = E.
struct CostToGo {
  std::vector<std::vector<Matrix>> table;  // [i][j], j = 0..n_i
  Matrix terminal;

  /// S_i for i = 0..N+1.
  const Matrix& at_switch(int i) const {
    return i == static_cast<int>(table.size()) ? terminal : table[i].front();
  }
};

/// Transition matrices between switching times, Phi(tau_l, tau_i), l >= i.
class PhiTable {
 public:
  PhiTable() = default;
  explicit PhiTable(const LinearizationCache& cache);

  /// Throws std::out_of_range when l < i.
  const Matrix& operator()(int l, int i) const;
  int num_times() const { return static_cast<int>(rows_.size()); }

 private:
  std::vector<std::vector<Matrix>> rows_;  // rows_[i][l - i]
};

struct CostEvaluation {
  double J = 0.0;
  Vector grad;
  Matrix hess;
  CostToGo S;
  std::vector<Matrix> C;  // i = 0..N
  PhiTable phi;
  GridPartition partition;
  LinearizationCache cache;
  Matrix Q;  // weights in the state space of the cache
  Matrix E;
};

struct EvaluatorOptions {
  /// Subdivide linear problems on the background grid as well. The result
  /// does not change; it only costs more exponentials.
  bool subdivide_linear = false;
  /// Use the eigendecomposition path for diagonalizable linear modes.
  bool use_eigen = true;
};

/// Evaluates J, its gradient and Hessian for one problem. Holds the offline
/// eigen factorization of linear modes and is immutable after construction.
class Evaluator {
 public:
  explicit Evaluator(SwitchedProblem problem, EvaluatorOptions options = {});

  const SwitchedProblem& problem() const { return problem_; }
  bool augmented() const { return augmented_; }
  const Matrix& Q() const { return Q_; }
  const Matrix& E() const { return E_; }
  const std::optional<EigenCache>& eigen_cache() const { return eigen_; }

  GridPartition partition(const Intervals& delta) const;
  LinearizationCache build_cache(const GridPartition& partition) const;
  CostEvaluation evaluate(const Intervals& delta) const;

 private:
  SwitchedProblem problem_;
  EvaluatorOptions options_;
  bool augmented_ = false;
  Matrix Q_;
  Matrix E_;
  Vector x0_;
  std::vector<double> grid_;
  std::optional<EigenCache> eigen_;
};

/// Backward recursion S_i^j = M_i^j + E_i^j' S_i^{j+1} E_i^j from S_{N+1} = E.
CostToGo compute_S(const LinearizationCache& cache, const Matrix& E);

std::vector<Matrix> compute_C(const CostToGo& S, const LinearizationCache& cache,
                              const Matrix& Q);

PhiTable compute_phi(const LinearizationCache& cache);

/// Single entry H(l, i) for l >= i.
double hessian_entry(const LinearizationCache& cache, const std::vector<Matrix>& C,
                     const PhiTable& phi, int l, int i);

Matrix assemble_hessian(const LinearizationCache& cache, const std::vector<Matrix>& C,
                        const PhiTable& phi);

/// Sum over subintervals of x' M x plus the terminal x' E x. Equals J.
double expanded_cost(const LinearizationCache& cache, const Matrix& E);

CostEvaluation evaluate(const SwitchedProblem& p, const Intervals& delta,
                        EvaluatorOptions options = {});

/// Cost of the frozen-linearization model when only the last subinterval of
/// interval i is stretched by eps: every A is held fixed, blocks downstream
/// of tau_{i+1} keep their durations. Throws std::invalid_argument if the
/// stretched subinterval would become negative.
double frozen_perturbation_cost(const LinearizationCache& cache, const CostToGo& S,
                                const Matrix& Q, int i, double eps);
double frozen_perturbation_cost(const CostEvaluation& eval, int i, double eps);

}  // namespace swto
