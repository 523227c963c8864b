#include "switchtime/nlpsolve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "clamped_shift.hpp"
#include "switchtime/simulate.hpp"

namespace swto {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ActiveSet {
  std::vector<bool> at_lower;
  std::vector<bool> at_upper;
};

ActiveSet active_bounds(const Vector& delta, const SwitchedProblem& p, double active_tol) {
  const double tol = active_tol * std::max(1.0, p.T);
  ActiveSet a;
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    const double lo = std::max(0.0, p.lower_bounds[i]);
    a.at_lower.push_back(delta[i] - lo <= tol);
    a.at_upper.push_back(std::isfinite(p.upper_bounds[i]) && p.upper_bounds[i] - delta[i] <= tol);
  }
  return a;
}

// Projection of -grad onto the cone of feasible directions.
Vector projected_direction(const Vector& grad, const ActiveSet& a) {
  const Eigen::Index m = grad.size();
  Vector lo(m), hi(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lo[i] = a.at_lower[i] ? 0.0 : -kInf;
    hi[i] = a.at_upper[i] ? 0.0 : kInf;
  }
  const Vector v = -grad;
  const auto shift = detail::solve_clamped_shift(v, lo, hi, 0.0);
  // The zero direction is always feasible, so a shift always exists.
  return detail::apply_clamped_shift(v, lo, hi, shift.value_or(0.0));
}

// Regularized Newton step restricted to the free coordinates and to the
// null space of the all-ones row.
Vector newton_direction(const Vector& grad, const Matrix& hess, const ActiveSet& a,
                        const Vector& pg, double regularization) {
  const Eigen::Index m = grad.size();
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool blocked = (a.at_lower[i] && pg[i] <= 0) || (a.at_upper[i] && pg[i] >= 0);
    if (!blocked) free.push_back(i);
  }
  const auto f = static_cast<Eigen::Index>(free.size());
  if (f < 2) return pg;

  Vector g(f);
  Matrix H(f, f);
  for (Eigen::Index r = 0; r < f; ++r) {
    g[r] = grad[free[r]];
    for (Eigen::Index c = 0; c < f; ++c) H(r, c) = hess(free[r], free[c]);
  }
  const Eigen::HouseholderQR<Matrix> qr(Matrix::Ones(f, 1));
  const Matrix Z = Matrix(qr.householderQ()).rightCols(f - 1);
  const Matrix Hr = Z.transpose() * H * Z;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Hr + Hr.transpose()));
  Vector lam = es.eigenvalues();
  const double floor = regularization * std::max(1.0, lam.cwiseAbs().maxCoeff());
  // Negative curvature is mirrored rather than clipped.
  for (Eigen::Index k = 0; k < lam.size(); ++k) lam[k] = std::max(std::abs(lam[k]), floor);
  const Matrix& V = es.eigenvectors();
  const Vector step = -Z * (V * ((V.transpose() * (Z.transpose() * g)).array() / lam.array()).matrix());

  Vector d = Vector::Zero(m);
  for (Eigen::Index r = 0; r < f; ++r) d[free[r]] = step[r];
  return d;
}

// Largest alpha with delta + alpha d inside the bounds.
double max_feasible_step(const Vector& delta, const Vector& d, const SwitchedProblem& p) {
  double alpha = kInf;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] < 0) {
      alpha = std::min(alpha, (delta[i] - std::max(0.0, p.lower_bounds[i])) / -d[i]);
    } else if (d[i] > 0 && std::isfinite(p.upper_bounds[i])) {
      alpha = std::min(alpha, (p.upper_bounds[i] - delta[i]) / d[i]);
    }
  }
  return alpha;
}

class Clock {
 public:
  Clock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::vector<double> lower_triangle(const Matrix& H) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(H.rows() * (H.rows() + 1) / 2));
  for (Eigen::Index r = 0; r < H.rows(); ++r) {
    for (Eigen::Index c = 0; c <= r; ++c) out.push_back(H(r, c));
  }
  return out;
}

void finish_report(SolveReport& rep, const SwitchedProblem& p, const Intervals& delta,
                   const CostEvaluation& ev, const SolverOptions& opts, const Clock& clock) {
  rep.delta_star = delta.durations();
  rep.tau_star = delta.interior_switching_times();
  rep.J_final = ev.J;
  rep.optimality = first_order_optimality(delta.durations(), ev.grad, p);
  rep.wall_time = clock.seconds();
  if (opts.compute_oracle) {
    try {
      rep.J_oracle = integrate(p, delta, {}, 2).J_oracle;
    } catch (const std::exception& e) {
      rep.message += std::string(rep.message.empty() ? "" : "; ") + "oracle failed: " + e.what();
    }
  }
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iter: return "max_iter";
    case Termination::line_search_failure: return "line_search_failure";
    case Termination::overflow: return "overflow";
  }
  return "unknown";
}

void validate(const SolverOptions& opts) {
  if (!(opts.tol > 0)) throw std::invalid_argument("solver tolerance must be positive");
  if (opts.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(opts.hessian_regularization > 0)) {
    throw std::invalid_argument("Hessian regularization must be positive");
  }
  const auto& ls = opts.line_search;
  if (!(ls.initial_step > 0) || !(ls.shrink > 0 && ls.shrink < 1) ||
      !(ls.sufficient_decrease > 0 && ls.sufficient_decrease < 1) || ls.max_backtracks < 1) {
    throw std::invalid_argument("invalid line search parameters");
  }
  if (opts.mode == SolverMode::external && !opts.external) {
    throw std::invalid_argument("external mode needs an external driver");
  }
}

double first_order_optimality(const Vector& delta, const Vector& grad,
                              const SwitchedProblem& p, double active_tol) {
  if (grad.size() != delta.size() || delta.size() != p.num_intervals()) {
    throw std::invalid_argument("first_order_optimality: dimension mismatch");
  }
  if (delta.size() <= 1) return 0.0;
  const ActiveSet a = active_bounds(delta, p, active_tol);
  return projected_direction(grad, a).cwiseAbs().maxCoeff();
}

NlpInterface make_nlp_interface(const Evaluator& evaluator) {
  struct Memo {
    Vector delta;
    std::optional<CostEvaluation> eval;
    int count = 0;
  };
  auto memo = std::make_shared<Memo>();
  auto at = [&evaluator, memo](const Vector& delta) -> const CostEvaluation& {
    if (!memo->eval || memo->delta.size() != delta.size() || memo->delta != delta) {
      memo->eval = evaluator.evaluate(Intervals(delta));
      memo->delta = delta;
      ++memo->count;
    }
    return *memo->eval;
  };

  const SwitchedProblem& p = evaluator.problem();
  NlpInterface nlp;
  nlp.num_variables = p.num_intervals();
  nlp.cost = [at](const Vector& d) { return at(d).J; };
  nlp.gradient = [at](const Vector& d) { return at(d).grad; };
  nlp.hessian_lower = [at](const Vector& d) { return lower_triangle(at(d).hess); };
  nlp.constraint_row = Vector::Ones(p.num_intervals());
  nlp.constraint_rhs = p.T;
  nlp.lower_bounds = p.lower_bounds.cwiseMax(0.0);
  nlp.upper_bounds = p.upper_bounds;
  nlp.evaluation_count = [memo] { return memo->count; };
  return nlp;
}

SolveReport solve(const SwitchedProblem& p, std::optional<Intervals> delta0,
                  const SolverOptions& opts) {
  validate(p);
  validate(opts);
  const Clock clock;
  const Evaluator evaluator(p, opts.evaluator);
  SolveReport rep;

  Intervals delta = delta0 ? project_to_delta(delta0->durations(), p)
                           : project_to_delta(Intervals::equally_spaced(p.num_intervals(), p.T).durations(), p);

  if (opts.mode == SolverMode::external) {
    const NlpInterface nlp = make_nlp_interface(evaluator);
    try {
      const Vector out = opts.external(nlp, delta.durations());
      delta = project_to_delta(out, p);
      const CostEvaluation ev = evaluator.evaluate(delta);
      rep.n_cost_evaluations = nlp.evaluation_count() + 1;
      rep.J_history.push_back(ev.J);
      finish_report(rep, p, delta, ev, opts, clock);
      rep.termination = rep.optimality <= opts.tol ? Termination::converged : Termination::max_iter;
    } catch (const PropagationOverflow& e) {
      rep.termination = Termination::overflow;
      rep.message = e.what();
      rep.delta_star = delta.durations();
      rep.tau_star = delta.interior_switching_times();
      rep.n_cost_evaluations = nlp.evaluation_count();
      rep.wall_time = clock.seconds();
    }
    return rep;
  }

  auto evaluate_counted = [&](const Intervals& d) {
    ++rep.n_cost_evaluations;
    return evaluator.evaluate(d);
  };

  CostEvaluation ev;
  try {
    ev = evaluate_counted(delta);
  } catch (const PropagationOverflow& e) {
    rep.termination = Termination::overflow;
    rep.message = e.what();
    rep.delta_star = delta.durations();
    rep.tau_star = delta.interior_switching_times();
    rep.wall_time = clock.seconds();
    return rep;
  }
  rep.J_history.push_back(ev.J);

  const auto& ls = opts.line_search;
  // Backtracking along the projected path delta + alpha d. Returns true and
  // updates delta/ev on sufficient decrease.
  auto line_search = [&](const Vector& d) {
    double alpha = std::min(ls.initial_step, max_feasible_step(delta.durations(), d, p));
    if (!(alpha > 0)) alpha = ls.initial_step;
    for (int k = 0; k < ls.max_backtracks; ++k, alpha *= ls.shrink) {
      Intervals trial = project_to_delta(delta.durations() + alpha * d, p);
      const Vector step = trial.durations() - delta.durations();
      const double slope = ev.grad.dot(step);
      if (step.cwiseAbs().maxCoeff() == 0.0) return false;
      if (!(slope < 0)) continue;
      CostEvaluation trial_ev;
      try {
        trial_ev = evaluate_counted(trial);
      } catch (const PropagationOverflow&) {
        continue;
      }
      if (trial_ev.J <= ev.J + ls.sufficient_decrease * slope) {
        delta = std::move(trial);
        ev = std::move(trial_ev);
        return true;
      }
    }
    return false;
  };

  rep.termination = Termination::max_iter;
  for (int it = 0; it < opts.max_iter; ++it) {
    const ActiveSet active = active_bounds(delta.durations(), p, 1e-10);
    const Vector pg = p.num_intervals() > 1 ? projected_direction(ev.grad, active)
                                            : Vector::Zero(1).eval();
    if (pg.cwiseAbs().maxCoeff() <= opts.tol) {
      rep.termination = Termination::converged;
      break;
    }
    const Vector d = opts.identity_hessian
                         ? pg
                         : newton_direction(ev.grad, ev.hess, active, pg,
                                            opts.hessian_regularization);
    bool accepted = line_search(d);
    if (!accepted && !opts.identity_hessian) accepted = line_search(pg);
    if (!accepted) {
      rep.termination = Termination::line_search_failure;
      rep.message = "no sufficient decrease along the Newton or projected gradient direction";
      break;
    }
    ++rep.iterations;
    rep.J_history.push_back(ev.J);
  }
  finish_report(rep, p, delta, ev, opts, clock);
  if (rep.termination == Termination::max_iter && rep.optimality <= opts.tol) {
    rep.termination = Termination::converged;
  }
  return rep;
}

}  // namespace swto
