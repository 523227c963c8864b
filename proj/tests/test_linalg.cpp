#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "switchtime/linalg.hpp"

using namespace swto;

namespace {

Matrix randn(std::mt19937& gen, int n, double scale = 1.0) {
  std::normal_distribution<double> N01;
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = scale * N01(gen);
  return M;
}

Matrix psd(std::mt19937& gen, int n) {
  const Matrix B = randn(gen, n);
  return B.transpose() * B / n;
}

Matrix A1() {
  Matrix A(2, 2);
  A << -1, 0, 1, 2;
  return A;
}

Matrix A2() {
  Matrix A(2, 2);
  A << 1, 1, 1, -2;
  return A;
}

}  // namespace

TEST(Expm, ZeroAndDiagonal) {
  EXPECT_TRUE(expm(Matrix::Zero(3, 3)).isIdentity(0));
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1;
  D(1, 1) = 2;
  const Matrix E = expm(D);
  EXPECT_NEAR(E(0, 0), std::exp(1.0), 1e-15 * std::exp(1.0));
  EXPECT_NEAR(E(1, 1), std::exp(2.0), 1e-15 * std::exp(2.0));
  EXPECT_EQ(E(0, 1), 0.0);
}

TEST(Expm, MatchesTaylorSeriesForSmallNorms) {
  std::mt19937 gen(1);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix M = randn(gen, 4);
    M /= M.operatorNorm();
    EXPECT_LE((expm(M) - oracle::taylor_expm(M)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Expm, LargeNormsNeedSquaring) {
  std::mt19937 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix M = randn(gen, 5, 3.0);
    EXPECT_LE(oracle::relative_error(expm(M), oracle::taylor_expm(M)), 1e-11);
  }
}

TEST(Expm, RejectsBadInput) {
  EXPECT_THROW(expm(Matrix::Zero(2, 3)), std::invalid_argument);
  Matrix M = Matrix::Zero(2, 2);
  M(0, 1) = std::nan("");
  EXPECT_THROW(expm(M), std::invalid_argument);
}

TEST(VanLoan, ClosedForms) {
  const auto zero = van_loan(Matrix::Zero(2, 2), Matrix::Identity(2, 2), 1.0);
  EXPECT_TRUE(zero.Emat.isIdentity(1e-15));
  EXPECT_TRUE(zero.Mmat.isApprox(Matrix::Identity(2, 2), 1e-15));

  const auto decay = van_loan(-Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0);
  EXPECT_TRUE(decay.Emat.isApprox(std::exp(-1.0) * Matrix::Identity(2, 2), 1e-15));
  EXPECT_TRUE(decay.Mmat.isApprox((1 - std::exp(-2.0)) / 2 * Matrix::Identity(2, 2), 1e-14));

  const auto none = van_loan(A1(), Matrix::Identity(2, 2), 0.0);
  EXPECT_TRUE(none.Emat.isIdentity(0));
  EXPECT_TRUE(none.Mmat.isZero(0));
  EXPECT_THROW(van_loan(A1(), Matrix::Identity(2, 2), -0.1), std::invalid_argument);
}

TEST(VanLoan, MatchesQuadrature) {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix A = randn(gen, 3) / std::sqrt(3.0);
    A -= (Eigen::EigenSolver<Matrix>(A).eigenvalues().real().maxCoeff() + 0.3) *
         Matrix::Identity(3, 3);
    const Matrix Q = psd(gen, 3);
    const auto r = van_loan(A, Q, 0.7);
    EXPECT_LE(oracle::relative_error(r.Mmat, oracle::cost_integral(A, Q, 0.7)), 1e-8);
    EXPECT_LE(oracle::relative_error(r.Emat, oracle::taylor_expm(A * 0.7)), 1e-12);
  }
}

TEST(VanLoan, SymmetricPsdOutput) {
  std::mt19937 gen(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix A = randn(gen, 4);
    const auto r = van_loan(A, psd(gen, 4), 0.5);
    const double scale = r.Mmat.norm();
    EXPECT_LE((r.Mmat - r.Mmat.transpose()).norm(), 1e-10 * scale);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(r.Mmat).eigenvalues().minCoeff(),
              -1e-10 * scale);
  }
}

TEST(VanLoan, SemigroupAndAdditivity) {
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    const Matrix A = randn(gen, n);
    const Matrix Q = psd(gen, n);
    const double a = U(gen), b = U(gen);
    const auto ra = van_loan(A, Q, a), rb = van_loan(A, Q, b), rab = van_loan(A, Q, a + b);
    EXPECT_LE(oracle::relative_error(ra.Emat * rb.Emat, rab.Emat), 1e-9);
    const Matrix M = ra.Mmat + ra.Emat.transpose() * rb.Mmat * ra.Emat;
    EXPECT_LE(oracle::relative_error(M, rab.Mmat), 1e-9);
  }
}

TEST(Eigen, DiagonalInput) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1;
  A(1, 1) = -1;
  const auto cache = precompute_eigen({A}, Matrix::Zero(2, 2));
  ASSERT_TRUE(cache.diagonalizable(0));
  std::vector<double> re;
  for (int k = 0; k < 4; ++k) {
    re.push_back(cache.modes[0].eigenvalues[k].real());
    EXPECT_EQ(cache.modes[0].eigenvalues[k].imag(), 0.0);
  }
  std::sort(re.begin(), re.end());
  EXPECT_EQ(re, (std::vector<double>{-1, -1, 1, 1}));
}

TEST(Eigen, DefectiveFallsBack) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = 1;
  const auto cache = precompute_eigen({A}, Matrix::Zero(2, 2));
  EXPECT_FALSE(cache.diagonalizable(0));
  EXPECT_THROW(van_loan_eigen(cache, 0, 0.5), std::logic_error);
  const auto r = van_loan_cached(cache, 0, 0.5);
  const auto ref = van_loan(A, Matrix::Zero(2, 2), 0.5);
  EXPECT_EQ(r.Emat, ref.Emat);
  EXPECT_EQ(r.Mmat, ref.Mmat);
}

TEST(Eigen, ReconstructsGenerators) {
  const Matrix Q = Matrix::Identity(2, 2);
  const auto cache = precompute_eigen({A1(), A2()}, Q);
  for (int i = 0; i < 2; ++i) {
    ASSERT_TRUE(cache.diagonalizable(i));
    const auto& f = cache.modes[i];
    const Matrix G = van_loan_generator(i == 0 ? A1() : A2(), Q);
    const Eigen::MatrixXcd R = f.eigenvectors * f.eigenvalues.asDiagonal() * f.eigenvectors_inverse;
    EXPECT_LE((R - G.cast<std::complex<double>>()).norm(), 1e-8 * G.norm());
  }
}

TEST(Eigen, AgreesWithExpmPath) {
  const Matrix Q = Matrix::Identity(2, 2);
  const auto cache = precompute_eigen({A1(), A2()}, Q);
  for (double d : {0.0, 0.1, 0.37, 1.0}) {
    for (int i = 0; i < 2; ++i) {
      const auto e = van_loan_eigen(cache, i, d);
      const auto r = van_loan(i == 0 ? A1() : A2(), Q, d);
      EXPECT_LE((e.Emat - r.Emat).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_LE((e.Mmat - r.Mmat).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
  const auto id = van_loan_eigen(cache, 0, 0.0);
  EXPECT_TRUE(id.Emat.isIdentity(1e-14));
  EXPECT_TRUE(id.Mmat.isZero(1e-14));
}

TEST(Eigen, ScalarDecay) {
  const auto cache = precompute_eigen({-Matrix::Identity(2, 2)}, Matrix::Identity(2, 2));
  if (cache.diagonalizable(0)) {
    const auto r = van_loan_eigen(cache, 0, 1.0);
    EXPECT_TRUE(r.Mmat.isApprox((1 - std::exp(-2.0)) / 2 * Matrix::Identity(2, 2), 1e-10));
  }
  const auto r = van_loan_cached(cache, 0, 1.0);
  EXPECT_TRUE(r.Mmat.isApprox((1 - std::exp(-2.0)) / 2 * Matrix::Identity(2, 2), 1e-10));
}

TEST(Eigen, RandomModesAgree) {
  std::mt19937 gen(9);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 3;
    const Matrix A = randn(gen, n);
    const Matrix Q = psd(gen, n);
    const auto cache = precompute_eigen({A}, Q);
    if (!cache.diagonalizable(0)) continue;
    const auto e = van_loan_eigen(cache, 0, 0.6);
    const auto r = van_loan(A, Q, 0.6);
    EXPECT_LE((e.Emat - r.Emat).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((e.Mmat - r.Mmat).cwiseAbs().maxCoeff(), 1e-8);
  }
}
