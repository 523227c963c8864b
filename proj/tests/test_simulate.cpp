#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "switchtime/benchmarks.hpp"
#include "switchtime/sensitivity.hpp"
#include "switchtime/simulate.hpp"

using namespace swto;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

Vector fishing_paper_delta() {
  const Vector tau = vec({0, 2.446, 4.150, 4.533, 4.799, 5.436, 5.616, 6.969, 7.033, 12});
  return tau.tail(9) - tau.head(9);
}

}  // namespace

TEST(Integrate, ZeroDynamics) {
  const Vector x0 = vec({1, -2});
  const auto p = make_problem({LinearMode{Matrix::Zero(2, 2)}}, x0, Matrix::Identity(2, 2),
                              Matrix::Zero(2, 2), 1.0, 2);
  EXPECT_NEAR(integrate(p, Intervals(vec({1.0}))).J_oracle, 5.0, 1e-12);
}

TEST(Integrate, ScalarDecay) {
  const auto p = make_problem({LinearMode{Matrix::Constant(1, 1, -1.0)}}, vec({1}),
                              Matrix::Identity(1, 1), Matrix::Zero(1, 1), 1.0, 2);
  const auto traj = integrate(p, Intervals(vec({1.0})), {1e-10, 1e-12});
  EXPECT_NEAR(traj.J_oracle, (1 - std::exp(-2.0)) / 2, 1e-8);
}

TEST(Integrate, SamplingInvariants) {
  const auto p = build_problem(fishing_definition());
  const Intervals d(fishing_paper_delta());
  const auto traj = integrate(p, d);
  ASSERT_GE(traj.size(), 500u);
  const Vector tau = d.switching_times();
  for (std::size_t k = 1; k < traj.size(); ++k) {
    EXPECT_GT(traj.times[k], traj.times[k - 1]);
    EXPECT_GE(traj.running_cost[k], traj.running_cost[k - 1]);
    if (traj.modes[k] != traj.modes[k - 1]) {
      EXPECT_NEAR(traj.times[k], tau[traj.modes[k]], 1e-12);
    }
  }
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    EXPECT_NE(std::find(traj.times.begin(), traj.times.end(), tau[i]), traj.times.end());
  }
  EXPECT_DOUBLE_EQ(traj.J_oracle, traj.running_cost.back() + traj.terminal_cost);
}

TEST(Integrate, CollapsedIntervalsAreSkipped) {
  const auto p = build_problem(unstable_linear_definition());
  const Vector d = vec({0.2, 0.0, 0.3, 0.0, 0.5, 0.0});
  const auto traj = integrate(p, Intervals(d));
  for (int mode : traj.modes) EXPECT_TRUE(mode == 0 || mode == 2 || mode == 4);
  EXPECT_NEAR(traj.J_oracle, evaluate(p, Intervals(d)).J, 1e-6 * traj.J_oracle);
}

TEST(Integrate, FishingPaperSolution) {
  const auto p = build_problem(fishing_definition());
  EXPECT_NEAR(integrate(p, Intervals(fishing_paper_delta())).J_oracle, 1.3456, 0.01 * 1.3456);
}

TEST(Integrate, TrackingCostMatchesTrapezoid) {
  const auto p = build_problem(tank_definition());
  const auto traj = integrate(p, Intervals::equally_spaced(16, 10.0), {}, 20001);
  double trap = 0.0;
  auto dev2 = [&](std::size_t k) {
    const double r = 3.0 - 0.5 * traj.times[k];
    return (traj.states[k][1] - r) * (traj.states[k][1] - r);
  };
  for (std::size_t k = 1; k < traj.size(); ++k) {
    trap += 0.5 * (traj.times[k] - traj.times[k - 1]) * (dev2(k) + dev2(k - 1));
  }
  EXPECT_NEAR(traj.J_oracle, trap, 1e-6 * trap);
}

TEST(Integrate, ConvergesUnderToleranceHalving) {
  const auto p = build_problem(fishing_definition());
  const Intervals d(fishing_paper_delta());
  const double ref = integrate(p, d, {1e-13, 1e-15}, 2).J_oracle;
  double prev = std::numeric_limits<double>::infinity();
  for (double rtol = 1e-4; rtol >= 1e-8; rtol /= 10) {
    const double err = std::abs(integrate(p, d, {rtol, rtol * 1e-2}, 2).J_oracle - ref);
    EXPECT_LE(err, std::max(prev, 1e-13));
    prev = err;
  }
  EXPECT_LE(prev, 1e-7 * ref);
}

TEST(Integrate, RejectsBadTolerances) {
  const auto p = build_problem(unstable_linear_definition());
  EXPECT_THROW(integrate(p, Intervals::equally_spaced(6, 1.0), {0.0, 1e-10}), std::invalid_argument);
  EXPECT_THROW(integrate(p, Intervals::equally_spaced(6, 1.0), {1e-8, -1.0}), std::invalid_argument);
}

TEST(Gap, LinearProblemsAreExact) {
  std::mt19937 gen(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto r = oracle::random_linear(gen, 3, 3, trial % 2 == 0);
    const auto gap = linearization_gap(oracle::to_problem(r), Intervals(r.delta), {1e-11, 1e-13});
    EXPECT_LE(gap.gap, 1e-8);
  }
}

TEST(Gap, ShrinksWithFinerGrid) {
  const Intervals d(fishing_paper_delta());
  const double coarse = linearization_gap(build_problem(fishing_definition(100)), d).gap;
  const double fine = linearization_gap(build_problem(fishing_definition(250)), d).gap;
  EXPECT_LT(fine, coarse);
}
