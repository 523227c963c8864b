// Reference simulation of the switched dynamics.
//
// Integrates the true (not linearized) modes with an adaptive Dormand-Prince
// 4(5) scheme, restarting at every switching time, and carries the running
// cost int x' Q x dt as an extra state. Used to check the linearized cost.

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "switchtime/problem.hpp"

namespace swto {

class StepSizeUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegratorTolerances {
  double rtol = 1e-8;
  double atol = 1e-10;
};

struct Trajectory {
  std::vector<double> times;        // strictly increasing, contains every tau_i
  std::vector<Vector> states;
  std::vector<int> modes;           // active interval index at each sample
  std::vector<double> running_cost; // int_0^t x' Q x
  double terminal_cost = 0.0;       // x(T)' E x(T)
  double J_oracle = 0.0;            // running_cost.back() + terminal_cost

  std::size_t size() const { return times.size(); }
};

/// Integrates mode over [0, duration] from x, with the running cost appended
/// as the last state component of the returned vector.
Vector integrate_mode(const ModeDynamics& mode, const Matrix& Q, const Vector& x,
                      double duration, IntegratorTolerances tol = {});

/// Integrates the switched system at delta. Output samples are the
/// switching times plus min_samples equally spaced points on [0, T].
/// Throws std::invalid_argument for bad tolerances or negative durations and
/// StepSizeUnderflow when the step controller collapses.
Trajectory integrate(const SwitchedProblem& p, const Intervals& delta,
                     IntegratorTolerances tol = {}, int min_samples = 501);

struct LinearizationGap {
  double gap = 0.0;
  bool absolute = false;  // true when J_oracle is zero and the gap is absolute
  double J_oracle = 0.0;
  double J_linearized = 0.0;
};

/// |J_oracle - J| / |J_oracle| with J from the grid-linearized evaluation.
LinearizationGap linearization_gap(const SwitchedProblem& p, const Intervals& delta,
                                   IntegratorTolerances tol = {});

}  // namespace swto
