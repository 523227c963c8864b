#include "switchtime/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "clamped_shift.hpp"

namespace swto {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_weight(const Matrix& W, int n, const char* name) {
  if (W.rows() != n || W.cols() != n) {
    std::ostringstream os;
    os << name << " must be " << n << "x" << n << ", got " << W.rows() << "x"
       << W.cols();
    throw std::invalid_argument(os.str());
  }
  if (!W.allFinite()) throw std::invalid_argument(std::string(name) + " has non-finite entries");
  const double scale = std::max(1.0, W.norm());
  if ((W - W.transpose()).norm() > 1e-12 * scale) {
    throw std::invalid_argument(std::string(name) + " is not symmetric");
  }
  if (n == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (W + W.transpose()),
                                           Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * W.norm()) {
    throw std::invalid_argument(std::string(name) + " is not positive semidefinite");
  }
}

}  // namespace

int mode_dimension(const ModeDynamics& mode) {
  return std::visit(overloaded{
                        [](const LinearMode& m) { return static_cast<int>(m.A.rows()); },
                        [](const NonlinearMode&) { return -1; },
                    },
                    mode);
}

Vector mode_rhs(const ModeDynamics& mode, const Vector& x) {
  return std::visit(overloaded{
                        [&](const LinearMode& m) -> Vector { return m.A * x; },
                        [&](const NonlinearMode& m) -> Vector { return m.f(x); },
                    },
                    mode);
}

Matrix mode_jacobian(const ModeDynamics& mode, const Vector& x) {
  return std::visit(overloaded{
                        [&](const LinearMode& m) -> Matrix { return m.A; },
                        [&](const NonlinearMode& m) -> Matrix { return m.jacobian(x); },
                    },
                    mode);
}

bool SwitchedProblem::is_linear() const {
  return std::all_of(modes.begin(), modes.end(), [](const ModeDynamics& m) {
    return std::holds_alternative<LinearMode>(m);
  });
}

void validate(const SwitchedProblem& p) {
  const int n = p.num_states();
  if (p.modes.empty()) throw std::invalid_argument("problem needs at least one mode");
  if (n == 0) throw std::invalid_argument("x0 is empty");
  if (!p.x0.allFinite()) throw std::invalid_argument("x0 has non-finite entries");
  for (std::size_t i = 0; i < p.modes.size(); ++i) {
    if (const auto* lin = std::get_if<LinearMode>(&p.modes[i])) {
      if (lin->A.rows() != n || lin->A.cols() != n) {
        std::ostringstream os;
        os << "mode " << i << ": A must be " << n << "x" << n;
        throw std::invalid_argument(os.str());
      }
      if (!lin->A.allFinite()) {
        throw std::invalid_argument("mode " + std::to_string(i) + ": A has non-finite entries");
      }
    } else {
      const auto& nl = std::get<NonlinearMode>(p.modes[i]);
      if (!nl.f || !nl.jacobian) {
        throw std::invalid_argument("mode " + std::to_string(i) + ": missing f or Jacobian");
      }
    }
  }
  check_weight(p.Q, n, "Q");
  check_weight(p.E, n, "E");
  if (!(p.T > 0) || !std::isfinite(p.T)) throw std::invalid_argument("T must be positive");
  if (p.n_grid < 2) throw std::invalid_argument("n_grid must be at least 2");
  const int m = p.num_intervals();
  if (p.lower_bounds.size() != m || p.upper_bounds.size() != m) {
    throw std::invalid_argument("bounds must have one entry per interval");
  }
  for (int i = 0; i < m; ++i) {
    const double lo = p.lower_bounds[i];
    const double hi = p.upper_bounds[i];
    if (!(lo >= 0) || !(lo <= hi) || std::isnan(hi)) {
      throw std::invalid_argument("interval " + std::to_string(i) +
                                  ": bounds must satisfy 0 <= lb <= ub");
    }
  }
  const double lo_sum = p.lower_bounds.sum();
  const double hi_sum = p.upper_bounds.sum();
  if (lo_sum > p.T * (1 + kHorizonTolerance) || hi_sum < p.T * (1 - kHorizonTolerance)) {
    throw std::invalid_argument("constraint set is empty: bounds are inconsistent with T");
  }
}

SwitchedProblem make_problem(std::vector<ModeDynamics> modes, Vector x0,
                             Matrix Q, Matrix E, double T, int n_grid,
                             std::optional<Vector> lower_bounds,
                             std::optional<Vector> upper_bounds) {
  SwitchedProblem p;
  const auto m = static_cast<Eigen::Index>(modes.size());
  p.modes = std::move(modes);
  p.x0 = std::move(x0);
  p.Q = std::move(Q);
  p.E = std::move(E);
  p.T = T;
  p.n_grid = n_grid;
  p.lower_bounds = lower_bounds ? *lower_bounds : Vector::Zero(m);
  p.upper_bounds = upper_bounds ? *upper_bounds : Vector::Constant(m, kInf);
  validate(p);
  return p;
}

Intervals::Intervals(Vector durations) : durations_(std::move(durations)) {}

double Intervals::total() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < durations_.size(); ++i) s += durations_[i];
  return s;
}

Vector Intervals::switching_times() const {
  Vector tau(durations_.size() + 1);
  tau[0] = 0.0;
  for (Eigen::Index i = 0; i < durations_.size(); ++i) tau[i + 1] = tau[i] + durations_[i];
  return tau;
}

Vector Intervals::interior_switching_times() const {
  const Vector tau = switching_times();
  if (tau.size() <= 2) return Vector(0);
  return tau.segment(1, tau.size() - 2);
}

Intervals Intervals::equally_spaced(int num_intervals, double T) {
  return Intervals(Vector::Constant(num_intervals, T / num_intervals));
}

std::vector<double> background_grid(double T, int n_grid) {
  if (n_grid < 2) throw std::invalid_argument("n_grid must be at least 2");
  std::vector<double> grid(static_cast<std::size_t>(n_grid));
  const double h = T / (n_grid - 1);
  for (int k = 0; k < n_grid; ++k) grid[k] = k * h;
  grid.back() = T;
  return grid;
}

GridPartition build_partition(const SwitchedProblem& p, const Intervals& delta) {
  return build_partition(background_grid(p.T, p.n_grid), p.T, delta);
}

GridPartition build_partition(const std::vector<double>& grid_times, double T,
                              const Intervals& delta) {
  for (int i = 0; i < delta.size(); ++i) {
    if (!(delta[i] >= 0)) {
      throw std::invalid_argument("interval " + std::to_string(i) + " has negative duration");
    }
  }
  const double total = delta.total();
  if (std::abs(total - T) > kHorizonTolerance * T) {
    std::ostringstream os;
    os << "sum of intervals " << total << " differs from horizon " << T;
    throw std::invalid_argument(os.str());
  }

  GridPartition part;
  part.grid_times = grid_times;
  part.intervals.resize(static_cast<std::size_t>(delta.size()));
  const double merge_tol = kGridCoincidenceTolerance * T;
  const Vector tau = delta.switching_times();

  // Grid points are sorted; walk them once.
  std::size_t k = 0;
  for (int i = 0; i < delta.size(); ++i) {
    auto& sub = part.intervals[i];
    const double start = tau[i];
    const double end = tau[i + 1];
    sub.times.push_back(start);
    while (k < grid_times.size() && grid_times[k] <= start + merge_tol) ++k;
    double prev = start;
    while (k < grid_times.size() && grid_times[k] < end - merge_tol) {
      sub.durations.push_back(grid_times[k] - prev);
      sub.times.push_back(grid_times[k]);
      prev = grid_times[k];
      ++k;
    }
    // Last piece closes the interval so the pieces add up to delta_i.
    sub.durations.push_back(delta[i] - (prev - start));
    sub.times.push_back(end);
  }
  return part;
}

Intervals project_to_delta(const Vector& raw, const SwitchedProblem& p) {
  return project_to_delta(raw, p.lower_bounds, p.upper_bounds, p.T);
}

Intervals project_to_delta(const Vector& raw, const Vector& lower,
                           const Vector& upper, double T) {
  const Eigen::Index m = raw.size();
  if (lower.size() != m || upper.size() != m) {
    throw std::invalid_argument("bounds must have one entry per interval");
  }
  if (!raw.allFinite()) throw std::invalid_argument("raw intervals have non-finite entries");
  const Vector lo = lower.cwiseMax(0.0);
  if (lo.sum() > T * (1 + kHorizonTolerance) || upper.sum() < T * (1 - kHorizonTolerance)) {
    throw std::invalid_argument("constraint set is empty: bounds are inconsistent with T");
  }
  const Intervals candidate(raw);
  const bool inside = (raw.array() >= lo.array()).all() && (raw.array() <= upper.array()).all();
  if (inside && std::abs(candidate.total() - T) <= 1e-14 * T) return candidate;

  const auto mu = detail::solve_clamped_shift(raw, lo, upper, T);
  if (!mu) throw std::invalid_argument("constraint set is empty: bounds are inconsistent with T");
  return Intervals(detail::apply_clamped_shift(raw, lo, upper, *mu));
}

bool is_feasible(const Intervals& delta, const SwitchedProblem& p, double tol) {
  if (delta.size() != p.num_intervals()) return false;
  for (int i = 0; i < delta.size(); ++i) {
    if (delta[i] < -tol || delta[i] < p.lower_bounds[i] - tol ||
        delta[i] > p.upper_bounds[i] + tol) {
      return false;
    }
  }
  return std::abs(delta.total() - p.T) <= tol * std::max(1.0, p.T);
}

SwitchedProblem augment_problem(const SwitchedProblem& p,
                                const ReferenceSignal& reference) {
  const int n = p.num_states();
  const auto k = static_cast<int>(reference.tracked.size());
  if (reference.r0.size() != k || reference.rdot.size() != k) {
    throw std::invalid_argument("reference r0/rdot must match the number of tracked components");
  }
  std::set<int> seen;
  for (int idx : reference.tracked) {
    if (idx < 0 || idx >= n) {
      throw std::invalid_argument("tracked component " + std::to_string(idx) + " is out of range");
    }
    if (!seen.insert(idx).second) {
      throw std::invalid_argument("tracked component " + std::to_string(idx) + " is repeated");
    }
  }

  // deviation = L z with z = [x; x_r], L = [I, -P'].
  Matrix L = Matrix::Zero(n, n + k);
  L.leftCols(n).setIdentity();
  for (int r = 0; r < k; ++r) L(reference.tracked[r], n + r) = -1.0;

  SwitchedProblem out;
  out.x0.resize(n + k);
  out.x0 << p.x0, reference.r0;
  out.Q = L.transpose() * p.Q * L;
  out.E = L.transpose() * p.E * L;
  out.T = p.T;
  out.n_grid = p.n_grid;
  out.lower_bounds = p.lower_bounds;
  out.upper_bounds = p.upper_bounds;

  const bool constant_reference = reference.rdot.isZero(0.0);
  for (const auto& mode : p.modes) {
    if (const auto* lin = std::get_if<LinearMode>(&mode); lin && constant_reference) {
      Matrix A = Matrix::Zero(n + k, n + k);
      A.topLeftCorner(n, n) = lin->A;
      out.modes.emplace_back(LinearMode{A});
      continue;
    }
    NonlinearMode aug;
    const Vector rdot = reference.rdot;
    aug.f = [mode, rdot, n](const Vector& z) {
      Vector dz(z.size());
      dz.head(n) = mode_rhs(mode, z.head(n));
      dz.tail(rdot.size()) = rdot;
      return dz;
    };
    aug.jacobian = [mode, n](const Vector& z) {
      Matrix J = Matrix::Zero(z.size(), z.size());
      J.topLeftCorner(n, n) = mode_jacobian(mode, z.head(n));
      return J;
    };
    out.modes.emplace_back(std::move(aug));
  }
  validate(out);
  return out;
}

namespace detail {

Eigen::VectorXd apply_clamped_shift(const Eigen::VectorXd& v,
                                    const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi, double mu) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i] - mu, lo[i], hi[i]);
  return out;
}

std::optional<double> solve_clamped_shift(const Eigen::VectorXd& v,
                                          const Eigen::VectorXd& lo,
                                          const Eigen::VectorXd& hi,
                                          double target) {
  const Eigen::Index n = v.size();
  auto phi = [&](double mu) { return apply_clamped_shift(v, lo, hi, mu).sum(); };
  // Number of unclamped terms just left of (or at) mu; the slope there is -count.
  auto free_count = [&](double mu) {
    int c = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = v[i] - mu;
      if (s > lo[i] && s < hi[i]) ++c;
    }
    return c;
  };

  std::vector<double> bp;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(lo[i])) bp.push_back(v[i] - lo[i]);
    if (std::isfinite(hi[i])) bp.push_back(v[i] - hi[i]);
  }
  if (bp.empty()) {
    if (n == 0) return std::nullopt;
    return (v.sum() - target) / static_cast<double>(n);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  const double phi_first = phi(bp.front());
  if (target >= phi_first) {
    if (target == phi_first) return bp.front();
    const int c = free_count(bp.front() - 1.0);
    if (c == 0) return std::nullopt;
    return bp.front() - (target - phi_first) / c;
  }
  const double phi_last = phi(bp.back());
  if (target <= phi_last) {
    if (target == phi_last) return bp.back();
    const int c = free_count(bp.back() + 1.0);
    if (c == 0) return std::nullopt;
    return bp.back() + (phi_last - target) / c;
  }
  double prev_mu = bp.front();
  double prev_phi = phi_first;
  for (std::size_t k = 1; k < bp.size(); ++k) {
    const double cur_phi = phi(bp[k]);
    if (cur_phi <= target) {
      if (cur_phi == prev_phi) return bp[k];
      return prev_mu + (target - prev_phi) * (bp[k] - prev_mu) / (cur_phi - prev_phi);
    }
    prev_mu = bp[k];
    prev_phi = cur_phi;
  }
  return bp.back();
}

}  // namespace detail

}  // namespace swto
