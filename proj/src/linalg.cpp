#include "switchtime/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace swto {

namespace {

// Pade coefficients b_0..b_m and the 1-norm thresholds theta_m for
// m = 3, 5, 7, 9, 13 (Higham 2005).
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

double norm1(const Matrix& M) { return M.cwiseAbs().colwise().sum().maxCoeff(); }

template <std::size_t N>
Matrix pade_low(const Matrix& A, const std::array<double, N>& b) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  Matrix U = b[1] * I;
  Matrix V = b[0] * I;
  Matrix P = I;
  for (std::size_t k = 2; k + 1 < N; k += 2) {
    P = P * A2;
    V += b[k] * P;
    U += b[k + 1] * P;
  }
  U = A * U;
  return (V - U).partialPivLu().solve(V + U);
}

Matrix pade13(const Matrix& A) {
  const auto& b = kPade13;
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;
  const Matrix U =
      A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
           b[3] * A2 + b[1] * I);
  const Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
                   b[4] * A4 + b[2] * A2 + b[0] * I;
  return (V - U).partialPivLu().solve(V + U);
}

}  // namespace

Matrix expm(const Matrix& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("expm: matrix is not square");
  if (!M.allFinite()) throw std::invalid_argument("expm: matrix has non-finite entries");
  const Eigen::Index n = M.rows();
  if (n == 0) return M;

  const double nrm = norm1(M);
  if (nrm <= kTheta3) return pade_low(M, kPade3);
  if (nrm <= kTheta5) return pade_low(M, kPade5);
  if (nrm <= kTheta7) return pade_low(M, kPade7);
  if (nrm <= kTheta9) return pade_low(M, kPade9);

  int s = 0;
  if (nrm > kTheta13) s = static_cast<int>(std::ceil(std::log2(nrm / kTheta13)));
  Matrix R = pade13(M / std::ldexp(1.0, s));
  for (int k = 0; k < s; ++k) R = R * R;
  return R;
}

Matrix van_loan_generator(const Matrix& A, const Matrix& Q) {
  const Eigen::Index n = A.rows();
  Matrix G = Matrix::Zero(2 * n, 2 * n);
  G.topLeftCorner(n, n) = -A.transpose();
  G.topRightCorner(n, n) = Q;
  G.bottomRightCorner(n, n) = A;
  return G;
}

VanLoanResult van_loan_extract(const Matrix& Z) {
  const Eigen::Index n = Z.rows() / 2;
  VanLoanResult r;
  r.Emat = Z.bottomRightCorner(n, n);
  const Matrix M = r.Emat.transpose() * Z.topRightCorner(n, n);
  r.Mmat = 0.5 * (M + M.transpose());
  return r;
}

VanLoanResult van_loan(const Matrix& A, const Matrix& Q, double delta) {
  if (A.rows() != A.cols()) throw std::invalid_argument("van_loan: A is not square");
  if (Q.rows() != A.rows() || Q.cols() != A.cols()) {
    throw std::invalid_argument("van_loan: Q and A dimensions differ");
  }
  if (!(delta >= 0)) throw std::invalid_argument("van_loan: negative duration");
  const Eigen::Index n = A.rows();
  if (delta == 0.0) return {Matrix::Identity(n, n), Matrix::Zero(n, n)};
  return van_loan_extract(expm(van_loan_generator(A, Q) * delta));
}

EigenCache precompute_eigen(const std::vector<Matrix>& mode_matrices, const Matrix& Q) {
  EigenCache cache;
  cache.Q = Q;
  for (const Matrix& A : mode_matrices) {
    Matrix G = van_loan_generator(A, Q);
    ModeEigenFactor f;
    Eigen::EigenSolver<Matrix> es(G, true);
    if (es.info() == Eigen::Success) {
      f.eigenvalues = es.eigenvalues();
      f.eigenvectors = es.eigenvectors();
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(f.eigenvectors);
      const auto& sv = svd.singularValues();
      const double smin = sv(sv.size() - 1);
      f.condition = smin > 0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
      if (std::isfinite(f.condition) && f.condition <= kEigenConditionLimit) {
        f.eigenvectors_inverse = f.eigenvectors.inverse();
        const Matrix rebuilt =
            (f.eigenvectors * f.eigenvalues.asDiagonal() * f.eigenvectors_inverse).real();
        f.diagonalizable = (rebuilt - G).norm() <= 1e-8 * std::max(1.0, G.norm());
      }
    }
    cache.modes.push_back(std::move(f));
    cache.generators.push_back(std::move(G));
  }
  return cache;
}

VanLoanResult van_loan_eigen(const EigenCache& cache, int i, double delta) {
  const ModeEigenFactor& f = cache.modes.at(static_cast<std::size_t>(i));
  if (!f.diagonalizable) {
    throw std::logic_error("van_loan_eigen: mode " + std::to_string(i) + " is not diagonalizable");
  }
  if (!(delta >= 0)) throw std::invalid_argument("van_loan_eigen: negative duration");
  const Eigen::Index n = cache.Q.rows();
  if (delta == 0.0) return {Matrix::Identity(n, n), Matrix::Zero(n, n)};
  const Eigen::VectorXcd scaled = (f.eigenvalues * delta).array().exp();
  const Eigen::MatrixXcd Z =
      f.eigenvectors * scaled.asDiagonal() * f.eigenvectors_inverse;
  const Matrix real = Z.real();
  if (Z.imag().norm() > 1e-8 * std::max(real.norm(), 1.0)) {
    throw std::runtime_error("van_loan_eigen: exponential has a non-negligible imaginary part");
  }
  return van_loan_extract(real);
}

VanLoanResult van_loan_cached(const EigenCache& cache, int i, double delta) {
  if (cache.diagonalizable(i)) return van_loan_eigen(cache, i, delta);
  if (!(delta >= 0)) throw std::invalid_argument("van_loan: negative duration");
  const Eigen::Index n = cache.Q.rows();
  if (delta == 0.0) return {Matrix::Identity(n, n), Matrix::Zero(n, n)};
  return van_loan_extract(expm(cache.generators[static_cast<std::size_t>(i)] * delta));
}

}  // namespace swto
