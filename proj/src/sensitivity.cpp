#include "switchtime/sensitivity.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace swto {

namespace {

Matrix augment_weight(const Matrix& W) {
  const Eigen::Index n = W.rows();
  Matrix out = Matrix::Zero(n + 1, n + 1);
  out.topLeftCorner(n, n) = W;
  return out;
}

// S_i^j from S_i^{j+1}.
Matrix step_back(const Matrix& E, const Matrix& M, const Matrix& next) {
  Matrix S = M + E.transpose() * next * E;
  return 0.5 * (S + S.transpose());
}

void check_state(const Vector& x, int i, int j) {
  if (!x.allFinite() || x.norm() > kOverflowNorm) {
    std::ostringstream os;
    os << "state diverged while propagating interval " << i << ", subinterval " << j
       << " (|x| = " << x.norm() << ")";
    throw PropagationOverflow(os.str());
  }
}

}  // namespace

Matrix linearize_at(const ModeDynamics& mode, const Vector& x) {
  if (const auto* lin = std::get_if<LinearMode>(&mode)) return lin->A;
  const auto& nl = std::get<NonlinearMode>(mode);
  const Eigen::Index n = x.size() - 1;
  const Vector xs = x.head(n);
  const Vector f = nl.f(xs);
  const Matrix J = nl.jacobian(xs);
  if (f.size() != n || J.rows() != n || J.cols() != n) {
    throw std::invalid_argument("linearize_at: mode output has wrong dimension");
  }
  if (!f.allFinite() || !J.allFinite()) {
    throw std::domain_error("linearize_at: non-finite dynamics or Jacobian");
  }
  Matrix A = Matrix::Zero(n + 1, n + 1);
  A.topLeftCorner(n, n) = J;
  A.topRightCorner(n, 1) = f - J * xs;
  return A;
}

Evaluator::Evaluator(SwitchedProblem problem, EvaluatorOptions options)
    : problem_(std::move(problem)), options_(options) {
  validate(problem_);
  augmented_ = !problem_.is_linear();
  if (augmented_) {
    Q_ = augment_weight(problem_.Q);
    E_ = augment_weight(problem_.E);
    x0_.resize(problem_.num_states() + 1);
    x0_ << problem_.x0, 1.0;
    grid_ = background_grid(problem_.T, problem_.n_grid);
  } else {
    Q_ = problem_.Q;
    E_ = problem_.E;
    x0_ = problem_.x0;
    if (options_.subdivide_linear) grid_ = background_grid(problem_.T, problem_.n_grid);
    if (options_.use_eigen) {
      std::vector<Matrix> mats;
      for (const auto& m : problem_.modes) mats.push_back(std::get<LinearMode>(m).A);
      eigen_ = precompute_eigen(mats, Q_);
    }
  }
}

GridPartition Evaluator::partition(const Intervals& delta) const {
  if (delta.size() != problem_.num_intervals()) {
    throw std::invalid_argument("expected " + std::to_string(problem_.num_intervals()) +
                                " intervals, got " + std::to_string(delta.size()));
  }
  return build_partition(grid_, problem_.T, delta);
}

LinearizationCache Evaluator::build_cache(const GridPartition& part) const {
  LinearizationCache cache;
  cache.augmented = augmented_;
  const int m = part.num_intervals();
  cache.blocks.resize(static_cast<std::size_t>(m));
  cache.grid_states.resize(static_cast<std::size_t>(m));
  cache.switch_states.reserve(static_cast<std::size_t>(m) + 1);

  Vector x = x0_;
  for (int i = 0; i < m; ++i) {
    const ModeDynamics& mode = problem_.modes[i];
    const auto& sub = part.intervals[i];
    cache.switch_states.push_back(x);
    for (int j = 0; j < sub.num_subintervals(); ++j) {
      SubintervalBlock b;
      b.duration = sub.durations[j];
      b.A = linearize_at(mode, x);
      VanLoanResult vl = (!augmented_ && eigen_) ? van_loan_cached(*eigen_, i, b.duration)
                                                 : van_loan(b.A, Q_, b.duration);
      b.E = std::move(vl.Emat);
      b.M = std::move(vl.Mmat);
      cache.grid_states[i].push_back(x);
      x = b.E * x;
      check_state(x, i, j);
      cache.blocks[i].push_back(std::move(b));
    }
  }
  cache.switch_states.push_back(x);
  return cache;
}

CostToGo compute_S(const LinearizationCache& cache, const Matrix& E) {
  CostToGo S;
  S.terminal = 0.5 * (E + E.transpose());
  const int m = cache.num_intervals();
  S.table.resize(static_cast<std::size_t>(m));
  const Matrix* next = &S.terminal;
  for (int i = m - 1; i >= 0; --i) {
    const auto& blocks = cache.blocks[i];
    auto& row = S.table[i];
    row.resize(blocks.size());
    for (int j = static_cast<int>(blocks.size()) - 1; j >= 0; --j) {
      row[j] = step_back(blocks[j].E, blocks[j].M, *next);
      next = &row[j];
    }
  }
  return S;
}

std::vector<Matrix> compute_C(const CostToGo& S, const LinearizationCache& cache,
                              const Matrix& Q) {
  std::vector<Matrix> C;
  const int m = cache.num_intervals();
  C.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const Matrix& A = cache.last_linearization(i);
    const Matrix& Snext = S.at_switch(i + 1);
    const Matrix AtS = A.transpose() * Snext;
    Matrix Ci = Q + AtS + AtS.transpose();
    C.push_back(0.5 * (Ci + Ci.transpose()));
  }
  return C;
}

PhiTable::PhiTable(const LinearizationCache& cache) {
  const int m = cache.num_intervals();
  const Eigen::Index n = cache.switch_states.front().size();
  std::vector<Matrix> segment;
  segment.reserve(static_cast<std::size_t>(m));
  for (const auto& blocks : cache.blocks) {
    Matrix P = Matrix::Identity(n, n);
    for (const auto& b : blocks) P = b.E * P;
    segment.push_back(std::move(P));
  }
  rows_.resize(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) {
    auto& row = rows_[i];
    row.reserve(static_cast<std::size_t>(m - i + 1));
    row.push_back(Matrix::Identity(n, n));
    for (int l = i; l < m; ++l) row.push_back(segment[l] * row.back());
  }
}

const Matrix& PhiTable::operator()(int l, int i) const {
  if (i < 0 || l < i || l >= num_times()) {
    throw std::out_of_range("Phi(tau_" + std::to_string(l) + ", tau_" + std::to_string(i) +
                            ") is not a forward transition");
  }
  return rows_[i][l - i];
}

PhiTable compute_phi(const LinearizationCache& cache) { return PhiTable(cache); }

double hessian_entry(const LinearizationCache& cache, const std::vector<Matrix>& C,
                     const PhiTable& phi, int l, int i) {
  const Vector& x_l = cache.switch_states[l + 1];
  const Vector& x_i = cache.switch_states[i + 1];
  const Vector w = C[l] * x_l;
  const Vector v = cache.last_linearization(i) * x_i;
  return 2.0 * w.dot(phi(l + 1, i + 1) * v);
}

Matrix assemble_hessian(const LinearizationCache& cache, const std::vector<Matrix>& C,
                        const PhiTable& phi) {
  const int m = cache.num_intervals();
  Matrix H(m, m);
  for (int i = 0; i < m; ++i) {
    for (int l = i; l < m; ++l) {
      const double h = hessian_entry(cache, C, phi, l, i);
      H(l, i) = h;
      H(i, l) = h;
    }
  }
  return H;
}

double expanded_cost(const LinearizationCache& cache, const Matrix& E) {
  double J = 0.0;
  for (int i = 0; i < cache.num_intervals(); ++i) {
    for (std::size_t j = 0; j < cache.blocks[i].size(); ++j) {
      const Vector& x = cache.grid_states[i][j];
      J += x.dot(cache.blocks[i][j].M * x);
    }
  }
  const Vector& xT = cache.switch_states.back();
  return J + xT.dot(E * xT);
}

CostEvaluation Evaluator::evaluate(const Intervals& delta) const {
  CostEvaluation ev;
  ev.partition = partition(delta);
  ev.cache = build_cache(ev.partition);
  ev.S = compute_S(ev.cache, E_);
  ev.C = compute_C(ev.S, ev.cache, Q_);
  ev.phi = compute_phi(ev.cache);
  ev.Q = Q_;
  ev.E = E_;

  const Vector& x0 = ev.cache.switch_states.front();
  ev.J = x0.dot(ev.S.at_switch(0) * x0);
  const int m = ev.cache.num_intervals();
  ev.grad.resize(m);
  for (int i = 0; i < m; ++i) {
    const Vector& x = ev.cache.switch_states[i + 1];
    ev.grad[i] = x.dot(ev.C[i] * x);
  }
  ev.hess = assemble_hessian(ev.cache, ev.C, ev.phi);
  return ev;
}

CostEvaluation evaluate(const SwitchedProblem& p, const Intervals& delta,
                        EvaluatorOptions options) {
  return Evaluator(p, options).evaluate(delta);
}

double frozen_perturbation_cost(const LinearizationCache& cache, const CostToGo& S,
                                const Matrix& Q, int i, double eps) {
  if (i < 0 || i >= cache.num_intervals()) throw std::out_of_range("interval index out of range");
  const SubintervalBlock& last = cache.blocks[i].back();
  const double stretched = last.duration + eps;
  if (stretched < 0) {
    throw std::invalid_argument("perturbation makes the last subinterval of interval " +
                                std::to_string(i) + " negative");
  }
  Matrix E = last.E;
  Matrix M = last.M;
  if (eps != 0.0) {
    VanLoanResult vl = van_loan(last.A, Q, stretched);
    E = std::move(vl.Emat);
    M = std::move(vl.Mmat);
  }
  Matrix acc = step_back(E, M, S.at_switch(i + 1));
  for (int k = i; k >= 0; --k) {
    const auto& blocks = cache.blocks[k];
    const int start = (k == i) ? static_cast<int>(blocks.size()) - 2
                               : static_cast<int>(blocks.size()) - 1;
    for (int j = start; j >= 0; --j) acc = step_back(blocks[j].E, blocks[j].M, acc);
  }
  const Vector& x0 = cache.switch_states.front();
  return x0.dot(acc * x0);
}

double frozen_perturbation_cost(const CostEvaluation& eval, int i, double eps) {
  return frozen_perturbation_cost(eval.cache, eval.S, eval.Q, i, eps);
}

}  // namespace swto
