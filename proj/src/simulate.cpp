#include "switchtime/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "switchtime/sensitivity.hpp"

namespace swto {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr int kMaxSteps = 10'000'000;

// State plus running cost.
class AugmentedRhs {
 public:
  AugmentedRhs(const ModeDynamics& mode, const Matrix& Q) : mode_(mode), Q_(Q) {}

  Vector operator()(const Vector& y) const {
    const Eigen::Index n = y.size() - 1;
    const Vector x = y.head(n);
    Vector dy(y.size());
    dy.head(n) = mode_rhs(mode_, x);
    dy[n] = x.dot(Q_ * x);
    return dy;
  }

 private:
  const ModeDynamics& mode_;
  const Matrix& Q_;
};

double initial_step(const AugmentedRhs& rhs, const Vector& y, const Vector& f0,
                    double span, const IntegratorTolerances& tol) {
  const Vector scale = (tol.atol + tol.rtol * y.array().abs()).matrix();
  const double d0 = (y.array() / scale.array()).matrix().norm() / std::sqrt(y.size());
  const double d1 = (f0.array() / scale.array()).matrix().norm() / std::sqrt(y.size());
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  const Vector f1 = rhs(y + h0 * f0);
  const double d2 =
      ((f1 - f0).array() / scale.array()).matrix().norm() / std::sqrt(y.size()) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100 * h0, h1, span});
}

// Advances y from t0 to t1 and updates the step-size hint h.
void integrate_span(const AugmentedRhs& rhs, Vector& y, double t0, double t1, double& h,
                    const IntegratorTolerances& tol) {
  double t = t0;
  const double span = t1 - t0;
  if (span <= 0) return;
  Vector k1 = rhs(y);
  if (!(h > 0)) h = initial_step(rhs, y, k1, span, tol);
  const double h_min = 1e-14 * std::max(1.0, std::abs(t1));
  for (int step = 0; step < kMaxSteps; ++step) {
    const bool last = t + h >= t1;
    const double hs = last ? t1 - t : h;
    const Vector k2 = rhs(y + hs * (a21 * k1));
    const Vector k3 = rhs(y + hs * (a31 * k1 + a32 * k2));
    const Vector k4 = rhs(y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = rhs(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = rhs(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = rhs(y_new);
    const Vector err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const Vector scale =
        (tol.atol + tol.rtol * y.array().abs().max(y_new.array().abs())).matrix();
    const double err_norm =
        (err.array() / scale.array()).matrix().norm() / std::sqrt(static_cast<double>(y.size()));
    if (!std::isfinite(err_norm) || !y_new.allFinite()) {
      h = 0.25 * hs;
    } else if (err_norm <= 1.0) {
      t = last ? t1 : t + hs;
      y = y_new;
      k1 = k7;
      const double fac = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      // Keep the unclipped step as the hint after a shortened final step.
      h = last ? std::max(h, hs * fac) : hs * fac;
      if (last) return;
      continue;
    } else {
      h = hs * std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
    }
    if (h < h_min) {
      std::ostringstream os;
      os << "step size underflow at t = " << t << " (h = " << h << ")";
      throw StepSizeUnderflow(os.str());
    }
  }
  throw StepSizeUnderflow("maximum number of integration steps exceeded");
}

void check_tolerances(const IntegratorTolerances& tol) {
  if (!(tol.rtol > 0 && tol.rtol <= 1e-2) || !(tol.atol > 0 && tol.atol <= 1e-2)) {
    throw std::invalid_argument("integrator tolerances must lie in (0, 1e-2]");
  }
}

}  // namespace

Vector integrate_mode(const ModeDynamics& mode, const Matrix& Q, const Vector& x,
                      double duration, IntegratorTolerances tol) {
  check_tolerances(tol);
  if (!(duration >= 0)) throw std::invalid_argument("negative integration duration");
  Vector y(x.size() + 1);
  y << x, 0.0;
  double h = 0.0;
  integrate_span(AugmentedRhs(mode, Q), y, 0.0, duration, h, tol);
  return y;
}

Trajectory integrate(const SwitchedProblem& p, const Intervals& delta,
                     IntegratorTolerances tol, int min_samples) {
  check_tolerances(tol);
  if (delta.size() != p.num_intervals()) {
    throw std::invalid_argument("interval count does not match the number of modes");
  }
  for (int i = 0; i < delta.size(); ++i) {
    if (!(delta[i] >= 0)) {
      throw std::invalid_argument("interval " + std::to_string(i) + " has negative duration");
    }
  }
  const Vector tau = delta.switching_times();
  const double t_final = tau[tau.size() - 1];
  const int n_samples = std::max(min_samples, 2);
  std::vector<double> uniform(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) uniform[k] = t_final * k / (n_samples - 1);
  const double eps_t = 1e-12 * std::max(1.0, t_final);

  Trajectory traj;
  const Eigen::Index n = p.num_states();
  Vector y(n + 1);
  y << p.x0, 0.0;
  auto record = [&](double t, int mode) {
    traj.times.push_back(t);
    traj.states.push_back(y.head(n));
    traj.modes.push_back(mode);
    traj.running_cost.push_back(y[n]);
  };

  int last_mode = 0;
  std::size_t u = 0;
  for (int i = 0; i < delta.size(); ++i) {
    if (delta[i] == 0.0) continue;
    const double t0 = tau[i];
    const double t1 = tau[i + 1];
    last_mode = i;
    if (traj.times.empty() || t0 > traj.times.back() + eps_t) record(t0, i);
    const AugmentedRhs rhs(p.modes[i], p.Q);
    double h = 0.0;
    double t = t0;
    while (u < uniform.size() && uniform[u] <= t0 + eps_t) ++u;
    while (u < uniform.size() && uniform[u] < t1 - eps_t) {
      integrate_span(rhs, y, t, uniform[u], h, tol);
      t = uniform[u];
      record(t, i);
      ++u;
    }
    integrate_span(rhs, y, t, t1, h, tol);
  }
  record(t_final, last_mode);

  const Vector xT = y.head(n);
  traj.terminal_cost = xT.dot(p.E * xT);
  traj.J_oracle = y[n] + traj.terminal_cost;
  return traj;
}

LinearizationGap linearization_gap(const SwitchedProblem& p, const Intervals& delta,
                                   IntegratorTolerances tol) {
  LinearizationGap g;
  g.J_oracle = integrate(p, delta, tol, 2).J_oracle;
  g.J_linearized = evaluate(p, delta).J;
  const double diff = std::abs(g.J_oracle - g.J_linearized);
  if (g.J_oracle == 0.0) {
    g.gap = diff;
    g.absolute = true;
  } else {
    g.gap = diff / std::abs(g.J_oracle);
  }
  return g;
}

}  // namespace swto
