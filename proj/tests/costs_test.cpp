#include "robarb/costs.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cost_oracle.hpp"

namespace robarb {
namespace {

TEST(StepCost, WorkedExamples) {
  const auto spec = CostSpec::per_share(0.01, 0.0002, 0.1 / 252.0);
  const double expected = 0.15 + 0.0015 + (0.1 / 252.0) * 5.0 * 101.0;
  EXPECT_NEAR(step_cost(spec, 101.0, 10.0, -5.0), expected, 1e-15);
  EXPECT_NEAR(expected, 0.351897, 5e-7);
  EXPECT_EQ(step_cost(spec, 101.0, 3.0, 3.0), 0.0);
  EXPECT_NEAR(step_cost(CostSpec::proportional(0.0001, 0.0, 0.0), 100.0, 0.0, 10.0), 0.1, 1e-15);
}

TEST(TotalCosts, WorkedExample) {
  const auto spec = CostSpec::per_share(0.01, 0.0002, 0.1 / 252.0);
  Eigen::MatrixXd prices(3, 1);
  prices << 100, 101, 99;
  Eigen::MatrixXd pos(2, 1);
  pos << 10, -5;
  const double expected = 0.30 + 0.003 + (0.1 / 252.0) * 5.0 * 101.0;
  EXPECT_NEAR(total_costs<double>(spec, pos, prices), expected, 1e-14);
  EXPECT_NEAR(expected, 0.503397, 5e-7);

  Eigen::MatrixXd with_close(3, 1);
  with_close << 10, -5, 0;
  EXPECT_EQ(total_costs<double>(spec, with_close, prices), total_costs<double>(spec, pos, prices));
  with_close(2, 0) = 1.0;
  EXPECT_THROW(total_costs<double>(spec, with_close, prices), InputError);
}

TEST(TotalCosts, ZeroCases) {
  Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(4, 2, 50.0);
  Eigen::MatrixXd pos = Eigen::MatrixXd::Random(3, 2) * 10.0;
  EXPECT_EQ(total_costs<double>(CostSpec::zero(), pos, prices), 0.0);
  EXPECT_EQ(total_costs<double>(CostSpec::per_share(), Eigen::MatrixXd::Zero(3, 2), prices), 0.0);
}

TEST(TotalCosts, MatchesHandExpansionAndProperties) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> price(20.0, 200.0), position(-10.0, 10.0), lambda(0.0, 0.05);
  const TransactionMode modes[] = {TransactionMode::kNone, TransactionMode::kPerShare, TransactionMode::kProportional};
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const int d = 1 + trial % 3;
    Eigen::MatrixXd prices(n + 1, d), pos(n, d);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j < d; ++j) prices(i, j) = price(gen);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) pos(i, j) = position(gen);
    CostSpec spec{modes[trial % 3], lambda(gen), lambda(gen), lambda(gen)};
    const double got = total_costs<double>(spec, pos, prices);
    EXPECT_NEAR(got, oracle::hand_costs(spec, pos, prices), 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_NEAR(total_costs<double>(spec.scaled(2.0), pos, prices), 2.0 * got, 1e-12);
  }
}

TEST(TotalCosts, ContinuousAcrossKinks) {
  const auto spec = CostSpec::per_share();
  Eigen::MatrixXd prices(3, 1);
  prices << 100, 102, 101;
  Eigen::MatrixXd pos(2, 1);
  pos << 3.0, 3.0;  // kink of |x| at the second step
  const double base = total_costs<double>(spec, pos, prices);
  for (double h : {1e-3, 1e-6, 1e-9}) {
    Eigen::MatrixXd up = pos, down = pos;
    up(1, 0) += h;
    down(1, 0) -= h;
    EXPECT_LE(std::abs(total_costs<double>(spec, up, prices) - base), 2.0 * spec.turnover_rate(102.0) * h + 1e-15);
    EXPECT_LE(std::abs(total_costs<double>(spec, down, prices) - base), 2.0 * spec.turnover_rate(102.0) * h + 1e-15);
  }
}

TEST(CostSpec, ValidationAndNames) {
  EXPECT_THROW((CostSpec{TransactionMode::kPerShare, -1.0, 0.0, 0.0}.validate()), InputError);
  for (auto m : {TransactionMode::kNone, TransactionMode::kPerShare, TransactionMode::kProportional})
    EXPECT_EQ(transaction_mode_from_string(to_string(m)), m);
  EXPECT_THROW(transaction_mode_from_string("bogus"), InputError);
}

}  // namespace
}  // namespace robarb
