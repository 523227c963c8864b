// Switched autonomous systems, switching intervals and the background grid.
//
// A switched problem fixes an ordered list of N+1 modes and asks for the
// durations delta_0..delta_N (the decision variables) that minimize
//
//   int_0^T x(t)' Q x(t) dt + x(T)' E x(T),   x' = f_i(x) on [tau_i, tau_{i+1}),
//
// subject to lb <= delta <= ub and sum(delta) = T. Nonlinear modes are
// re-linearized on a fixed, equally spaced background grid; the grid
// partition splits every interval at the grid points it contains.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace swto {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// x' = A x.
struct LinearMode {
  Matrix A;
};

/// x' = f(x) with a user supplied Jacobian.
struct NonlinearMode {
  std::function<Vector(const Vector&)> f;
  std::function<Matrix(const Vector&)> jacobian;
};

using ModeDynamics = std::variant<LinearMode, NonlinearMode>;

/// Number of states the mode acts on.
int mode_dimension(const ModeDynamics& mode);

/// Evaluates f_i(x) for either kind of mode.
Vector mode_rhs(const ModeDynamics& mode, const Vector& x);

/// Evaluates the Jacobian of f_i at x for either kind of mode.
Matrix mode_jacobian(const ModeDynamics& mode, const Vector& x);

struct SwitchedProblem {
  std::vector<ModeDynamics> modes;  // N+1 modes, in activation order
  Vector x0;
  Matrix Q;  // running cost weight
  Matrix E;  // terminal cost weight
  double T = 1.0;
  Vector lower_bounds;  // per interval, default 0
  Vector upper_bounds;  // per interval, default +inf
  int n_grid = 2;

  int num_states() const { return static_cast<int>(x0.size()); }
  int num_intervals() const { return static_cast<int>(modes.size()); }
  /// N: number of interior switching times.
  int num_switches() const { return num_intervals() - 1; }
  bool is_linear() const;
};

/// Fills default bounds and checks the problem invariants. Throws
/// std::invalid_argument with a description of the first violation.
SwitchedProblem make_problem(std::vector<ModeDynamics> modes, Vector x0,
                             Matrix Q, Matrix E, double T, int n_grid,
                             std::optional<Vector> lower_bounds = {},
                             std::optional<Vector> upper_bounds = {});

void validate(const SwitchedProblem& p);

/// Switching intervals delta_0..delta_N. Switching times are always derived
/// from the durations by prefix sums.
class Intervals {
 public:
  Intervals() = default;
  explicit Intervals(Vector durations);

  const Vector& durations() const { return durations_; }
  double operator[](int i) const { return durations_[i]; }
  int size() const { return static_cast<int>(durations_.size()); }

  /// tau_0 = 0, tau_1, ..., tau_{N+1} = total(); N+2 entries.
  Vector switching_times() const;
  /// tau_1..tau_N, the interior switching times.
  Vector interior_switching_times() const;
  /// Left-to-right sum of the durations.
  double total() const;

  /// Equal durations T/(N+1).
  static Intervals equally_spaced(int num_intervals, double T);

 private:
  Vector durations_;
};

/// Subdivision of one switching interval by the background grid points it
/// strictly contains. durations has n_i + 1 entries, times has n_i + 2
/// entries (times.front() = tau_i, times.back() = tau_{i+1}).
struct IntervalSubdivision {
  std::vector<double> durations;
  std::vector<double> times;

  int interior_points() const { return static_cast<int>(durations.size()) - 1; }
  int num_subintervals() const { return static_cast<int>(durations.size()); }
};

struct GridPartition {
  std::vector<double> grid_times;
  std::vector<IntervalSubdivision> intervals;

  int num_intervals() const { return static_cast<int>(intervals.size()); }
};

/// Equally spaced grid of n_grid points on [0, T], endpoints included.
std::vector<double> background_grid(double T, int n_grid);

/// Grid points within this fraction of T of a switching time are merged into it.
inline constexpr double kGridCoincidenceTolerance = 1e-12;
/// Allowed relative mismatch between sum(delta) and T.
inline constexpr double kHorizonTolerance = 1e-9;

/// Assigns every background point strictly inside [tau_i, tau_{i+1}) to
/// interval i. Throws std::invalid_argument on negative durations or when
/// sum(delta) is not T.
GridPartition build_partition(const SwitchedProblem& p, const Intervals& delta);

/// Partition of delta against an explicit list of grid times (may be empty,
/// which yields one subinterval per interval).
GridPartition build_partition(const std::vector<double>& grid_times, double T,
                              const Intervals& delta);

/// Euclidean projection onto {lb <= delta <= ub, delta >= 0, sum = T}.
/// Throws std::invalid_argument when the set is empty.
Intervals project_to_delta(const Vector& raw, const SwitchedProblem& p);
Intervals project_to_delta(const Vector& raw, const Vector& lower,
                           const Vector& upper, double T);

/// True if delta satisfies bounds and the horizon constraint within tol.
bool is_feasible(const Intervals& delta, const SwitchedProblem& p,
                 double tol = 1e-10);

/// Tracking reference r(t) = r0 + rdot * t for the listed state components.
struct ReferenceSignal {
  Vector r0;
  Vector rdot;
  std::vector<int> tracked;  // 0-based indices into the state
};

/// Extends the state with the reference states, x_r' = rdot, x_r(0) = r0,
/// and rewrites Q and E as congruences so that the cost penalizes
/// (x - P' x_r)' Q (x - P' x_r), where P selects the tracked components.
/// Linear modes stay linear when rdot = 0, otherwise they become affine
/// nonlinear modes.
SwitchedProblem augment_problem(const SwitchedProblem& p,
                                const ReferenceSignal& reference);

}  // namespace swto
