#include "robarb/objective.hpp"

#include <gtest/gtest.h>

#include "robarb/errors.hpp"

namespace robarb {
namespace {

PathMatrix random_base(Rng& rng, Eigen::Index count, int n, int d) {
  PathMatrix p;
  p.horizon = n;
  p.assets = d;
  p.spot = Eigen::VectorXd::Constant(d, 100.0);
  p.values.resize(n * d, count);
  for (Eigen::Index l = 0; l < count; ++l)
    for (Eigen::Index r = 0; r < n * d; ++r) p.values(r, l) = 100.0 + 3.0 * rng.normal();
  return p;
}

// Strategy that never trades: h = c on every path.
StrategyNetwork<double> idle_strategy(int d, int n, double cash) {
  auto rng = Rng::stream(0, "init");
  auto net = init_strategy<double>(rng, d, n, 10.0, {4});
  for (auto& p : net.nets) {
    p.head.weight.setZero();
    p.head.bias.setZero();
  }
  net.cash = cash;
  return net;
}

TEST(Penalty, Properties) {
  const PenaltyFn<double> beta;
  EXPECT_EQ(beta(-3.0), 0.0);
  EXPECT_EQ(beta(0.0), 0.0);
  EXPECT_EQ(beta(1.0), 1.0);
  EXPECT_EQ(beta(0.5), 0.25);
  EXPECT_EQ(beta.derivative(-1.0), 0.0);
  EXPECT_EQ(beta.derivative(3.0), 6.0);
  auto rng = Rng::stream(1, "t");
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.uniform(-5, 5), y = rng.uniform(-5, 5);
    EXPECT_LE(beta(0.5 * (x + y)), 0.5 * (beta(x) + beta(y)) + 1e-12);
    if (x > 0 && y > x) {
      EXPECT_LT(beta(x), beta(y));
    }
  }
}

TEST(CellMeans, Examples) {
  const std::vector<std::uint64_t> same{0, 0};
  const auto m = conditional_cell_means<double>(Eigen::Vector2d(1, 3), same, 3);
  EXPECT_EQ(m[0], 2.0);
  EXPECT_EQ(m[1], 0.0);
  EXPECT_EQ(m[2], 0.0);
  const std::vector<std::uint64_t> own{0, 1, 2};
  EXPECT_EQ(conditional_cell_means<double>(Eigen::Vector3d(4, 5, 6), own, 3), Eigen::Vector3d(4, 5, 6));
  const std::vector<std::uint64_t> bad{0, 5};
  EXPECT_THROW(conditional_cell_means<double>(Eigen::Vector2d(1, 3), bad, 3), InputError);
}

TEST(CellMeans, TowerIdentity) {
  auto rng = Rng::stream(2, "t");
  const int count = 500;
  Eigen::VectorXd values(count);
  std::vector<std::uint64_t> ids(count);
  for (int l = 0; l < count; ++l) {
    values[l] = rng.normal();
    ids[static_cast<std::size_t>(l)] = rng.next_u64() % 17;
  }
  const auto means = conditional_cell_means<double>(values, ids, 17);
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(17);
  for (auto id : ids) weight[static_cast<Eigen::Index>(id)] += 1.0 / count;
  EXPECT_NEAR(weight.dot(means), values.mean(), 1e-12);
}

TEST(CompactCells, PreservesOrder) {
  const std::vector<std::uint64_t> ids{4095, 7, 7, 0};
  std::uint64_t n = 0;
  EXPECT_EQ(compact_cells(ids, &n), (std::vector<std::uint64_t>{2, 1, 1, 0}));
  EXPECT_EQ(n, 3u);
}

TEST(PenalizedLoss, SingleCellWorkedExample) {
  auto rng = Rng::stream(3, "t");
  const auto base = random_base(rng, 30, 3, 2);
  const std::vector<ScenarioSet> amb{empirical_measure(base)};
  auto prng = Rng::stream(3, "partition");
  const auto partition = sample_boxes(prng, compute_bounds(base, 1.0), 0);
  ObjectiveConfig<double> cfg;
  cfg.partition = &partition;
  for (double k : {1.0, 2.5}) {
    cfg.k = k;
    const auto r = penalized_loss(idle_strategy(2, 3, -1.0), std::span<const ScenarioSet>(amb), cfg,
                                  CostSpec::zero());
    EXPECT_DOUBLE_EQ(r.loss, -1.0 + k);
    EXPECT_DOUBLE_EQ(r.penalty, 1.0);
  }
}

TEST(PenalizedLoss, FeasibleStrategyLossIsCash) {
  auto rng = Rng::stream(4, "t");
  const auto base = random_base(rng, 40, 3, 2);
  auto mrng = Rng::stream(4, "perturbation");
  const auto amb = build_ambiguity_set(mrng, base, 1.0, 5);
  ObjectiveConfig<double> cfg;
  for (int depth : {1, 4, 12}) {
    auto prng = Rng::stream(4, "partition");
    const auto partition = sample_boxes(prng, compute_bounds(base, 1.0), depth);
    cfg.partition = &partition;
    const auto r = penalized_loss(idle_strategy(2, 3, 0.5), std::span<const ScenarioSet>(amb), cfg,
                                  CostSpec::zero());
    EXPECT_EQ(r.penalty, 0.0);
    EXPECT_EQ(r.loss, 0.5);
  }
}

TEST(PenalizedLoss, LinearAndIncreasingInK) {
  auto rng = Rng::stream(5, "t");
  const auto base = random_base(rng, 40, 3, 2);
  auto mrng = Rng::stream(5, "perturbation");
  const auto amb = build_ambiguity_set(mrng, base, 1.0, 3);
  auto prng = Rng::stream(5, "partition");
  const auto partition = sample_boxes(prng, compute_bounds(base, 1.0), 6);
  auto irng = Rng::stream(5, "init");
  auto net = init_strategy<double>(irng, 2, 3, 10.0, {8});
  net.cash = -2.0;
  ObjectiveConfig<double> cfg;
  cfg.partition = &partition;
  const auto costs = CostSpec::per_share();
  cfg.k = 1.0;
  const auto one = penalized_loss(net, std::span<const ScenarioSet>(amb), cfg, costs);
  cfg.k = 2.0;
  const auto two = penalized_loss(net, std::span<const ScenarioSet>(amb), cfg, costs);
  ASSERT_GT(one.penalty, 0.0);
  EXPECT_NEAR(two.loss - net.cash, 2.0 * (one.loss - net.cash), 1e-12);
  EXPECT_GT(two.loss, one.loss);
}

TEST(PenalizedLoss, CashGradientMatchesFiniteDifference) {
  auto rng = Rng::stream(6, "t");
  const auto base = random_base(rng, 40, 2, 1);
  auto mrng = Rng::stream(6, "perturbation");
  const auto amb = build_ambiguity_set(mrng, base, 1.0, 2);
  auto prng = Rng::stream(6, "partition");
  const auto partition = sample_boxes(prng, compute_bounds(base, 1.0), 4);
  auto irng = Rng::stream(6, "init");
  auto net = init_strategy<double>(irng, 1, 2, 10.0, {4});
  net.cash = -0.3;
  ObjectiveConfig<double> cfg;
  cfg.partition = &partition;
  GradientBundle<double> g;
  penalized_loss(net, std::span<const ScenarioSet>(amb), cfg, CostSpec::per_share(), NormMode::kBatch, &g);
  auto at = [&](double c) {
    auto s = net;
    s.cash = c;
    return penalized_loss(s, std::span<const ScenarioSet>(amb), cfg, CostSpec::per_share()).loss;
  };
  const double fd = (at(-0.3 + 1e-6) - at(-0.3 - 1e-6)) / 2e-6;
  EXPECT_NEAR(g.cash, fd, 1e-5 * std::max(1.0, std::abs(fd)));
  EXPECT_LT(g.cash, 1.0);
}

TEST(PenalizedLoss, NegativeViolationsGiveZeroPenaltyGradient) {
  auto rng = Rng::stream(7, "t");
  const auto base = random_base(rng, 20, 2, 1);
  const std::vector<ScenarioSet> amb{empirical_measure(base)};
  auto prng = Rng::stream(7, "partition");
  const auto partition = sample_boxes(prng, compute_bounds(base, 1.0), 3);
  ObjectiveConfig<double> cfg;
  cfg.partition = &partition;
  GradientBundle<double> g;
  penalized_loss(idle_strategy(1, 2, 1.0), std::span<const ScenarioSet>(amb), cfg, CostSpec::zero(),
                 NormMode::kBatch, &g);
  const auto flat = flatten_gradient(g);
  EXPECT_EQ(flat[0], 1.0);
  EXPECT_TRUE(flat.tail(flat.size() - 1).isZero(0));
}

TEST(PenalizedLoss, PayoffShiftsViolations) {
  auto rng = Rng::stream(8, "t");
  const auto base = random_base(rng, 20, 2, 1);
  const std::vector<ScenarioSet> amb{empirical_measure(base)};
  auto prng = Rng::stream(8, "partition");
  const auto partition = sample_boxes(prng, compute_bounds(base, 1.0), 0);
  ObjectiveConfig<double> cfg;
  cfg.partition = &partition;
  cfg.payoff = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 3.0; };
  const auto r = penalized_loss(idle_strategy(1, 2, 1.0), std::span<const ScenarioSet>(amb), cfg,
                                CostSpec::zero());
  EXPECT_DOUBLE_EQ(r.loss, 1.0 + 4.0);
  cfg.payoff = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 11.0; };
  EXPECT_THROW(penalized_loss(idle_strategy(1, 2, 1.0), std::span<const ScenarioSet>(amb), cfg,
                              CostSpec::zero()),
               InputError);
}

TEST(PenalizedLoss, OutOfBoundsTerminalPropagates) {
  auto rng = Rng::stream(9, "t");
  const auto base = random_base(rng, 20, 2, 1);
  auto prng = Rng::stream(9, "partition");
  const auto partition = sample_boxes(prng, compute_bounds(base, 0.1), 2);
  auto mrng = Rng::stream(9, "perturbation");
  const auto amb = build_ambiguity_set(mrng, base, 50.0, 3);
  ObjectiveConfig<double> cfg;
  cfg.partition = &partition;
  EXPECT_THROW(penalized_loss(idle_strategy(1, 2, 0.0), std::span<const ScenarioSet>(amb), cfg,
                              CostSpec::zero()),
               OutOfBoundsError);
}

TEST(EstimateGamma, UntrainedIsZero) {
  auto irng = Rng::stream(0, "init");
  EXPECT_EQ(estimate_gamma(init_strategy<double>(irng, 2, 3, 10.0, {4})), 0.0);
}

}  // namespace
}  // namespace robarb
