// Matrix exponential kernels.
//
// van_loan() evaluates, with one exponential of the block matrix
//
//   G = [ -A'  Q ]
//       [  0   A ],
//
// both the transition matrix e^{A delta} and the cost integral
// int_0^delta e^{A' s} Q e^{A s} ds. For constant dynamics the block matrix
// can be diagonalized once and exponentiated with scalar exponentials.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace swto {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// e^M by scaling and squaring with degree 3..13 Pade approximants.
/// Throws std::invalid_argument for non-square or non-finite input.
Matrix expm(const Matrix& M);

struct VanLoanResult {
  Matrix Emat;  // e^{A delta}
  Matrix Mmat;  // int_0^delta e^{A' s} Q e^{A s} ds, symmetrized
};

/// [-A', Q; 0, A].
Matrix van_loan_generator(const Matrix& A, const Matrix& Q);

VanLoanResult van_loan(const Matrix& A, const Matrix& Q, double delta);

/// Splits Z = e^{G delta} into the transition matrix and the cost integral.
VanLoanResult van_loan_extract(const Matrix& Z);

/// Eigenvector matrices with a condition number above this take the expm path.
inline constexpr double kEigenConditionLimit = 1e8;

struct ModeEigenFactor {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd eigenvectors;          // right eigenvectors, columns
  Eigen::MatrixXcd eigenvectors_inverse;
  bool diagonalizable = false;
  double condition = 0.0;
};

/// Offline factorization of the Van Loan generators of constant modes.
struct EigenCache {
  std::vector<ModeEigenFactor> modes;
  std::vector<Matrix> generators;  // G_i, kept for the fallback path
  Matrix Q;

  int size() const { return static_cast<int>(modes.size()); }
  bool diagonalizable(int i) const { return modes[i].diagonalizable; }
};

EigenCache precompute_eigen(const std::vector<Matrix>& mode_matrices, const Matrix& Q);

/// Z = Y e^{Lambda delta} Y^{-1} followed by the van_loan extraction.
/// Throws std::logic_error if mode i was not marked diagonalizable and
/// std::runtime_error if the result has a significant imaginary part.
VanLoanResult van_loan_eigen(const EigenCache& cache, int i, double delta);

/// Uses the eigen path for diagonalizable modes, expm otherwise.
VanLoanResult van_loan_cached(const EigenCache& cache, int i, double delta);

}  // namespace swto
