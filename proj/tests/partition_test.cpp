#include "robarb/partition.hpp"

#include <random>

#include <gtest/gtest.h>

#include "robarb/errors.hpp"

namespace robarb {
namespace {

BoxPartition worked_example() {
  BoxPartition p;
  p.bounds.lower = Eigen::Vector2d(0, 0);
  p.bounds.upper = Eigen::Vector2d(10, 10);
  p.lower.resize(2, 2);
  p.upper = Eigen::MatrixXd::Constant(2, 2, 10.0);
  p.lower << 2, 3, 5, 7;
  return p;
}

TEST(CellIndex, WorkedExample) {
  const auto p = worked_example();
  EXPECT_EQ(cell_index(p, Eigen::Vector2d(6, 8)), 3u);
  EXPECT_EQ(cell_index(p, Eigen::Vector2d(1, 1)), 0u);
  EXPECT_EQ(cell_index(p, Eigen::Vector2d(3, 4)), 1u);
  // On a lower corner: outside the half-open box.
  EXPECT_EQ(cell_index(p, Eigen::Vector2d(2, 8)), 0u);
  EXPECT_EQ(cell_index(p, Eigen::Vector2d(5, 8)), 1u);
  // Upper corner belongs to the box.
  EXPECT_EQ(cell_index(p, Eigen::Vector2d(10, 10)), 3u);
}

TEST(CellIndex, OutOfBoundsAndShape) {
  const auto p = worked_example();
  EXPECT_THROW(cell_index(p, Eigen::Vector2d(10.5, 1)), OutOfBoundsError);
  EXPECT_THROW(cell_index(p, Eigen::Vector2d(-1e-9, 1)), OutOfBoundsError);
  EXPECT_THROW(cell_index(p, Eigen::Vector3d(1, 1, 1)), InputError);
}

TEST(CellIndex, DepthZeroIsOneCell) {
  AssetBounds b;
  b.lower = Eigen::Vector2d(0, 0);
  b.upper = Eigen::Vector2d(1, 1);
  auto rng = Rng::stream(1, "t");
  const auto p = sample_boxes(rng, b, 0);
  EXPECT_EQ(p.depth(), 0);
  EXPECT_EQ(cell_index(p, Eigen::Vector2d(0.3, 0.9)), 0u);
}

TEST(CellIndex, ExactlyDepthTimesAssetsComparisons) {
  AssetBounds b;
  b.lower = Eigen::Vector3d(0, 0, 0);
  b.upper = Eigen::Vector3d(1, 2, 3);
  auto rng = Rng::stream(4, "t");
  const auto p = sample_boxes(rng, b, 12);
  int calls = 0;
  auto counting = [&calls](double a, double hi, double x) {
    ++calls;
    return HalfOpenTest{}(a, hi, x);
  };
  const Eigen::Vector3d x(0.5, 1.0, 2.9);
  const auto idx = cell_index(p, x, counting);
  EXPECT_EQ(calls, 12 * 3);
  EXPECT_EQ(idx, cell_index(p, x));
}

TEST(SampleBoxes, SupportAndDeterminism) {
  AssetBounds b;
  b.lower = Eigen::Vector2d(80, 60);
  b.upper = Eigen::Vector2d(120, 90);
  auto r1 = Rng::stream(9, "partition");
  auto r2 = Rng::stream(9, "partition");
  const auto p = sample_boxes(r1, b, 12);
  const auto q = sample_boxes(r2, b, 12);
  EXPECT_EQ(p.depth(), 12);
  EXPECT_EQ(p.lower, q.lower);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_GE(p.lower(i, j), b.lower[j]);
      EXPECT_LE(p.lower(i, j), b.upper[j]);
      EXPECT_EQ(p.upper(i, j), b.upper[j]);
    }
  EXPECT_THROW(sample_boxes(r1, b, 64), InputError);
}

TEST(BruteForce, SingleSplit) {
  BoxPartition p;
  p.bounds.lower = Eigen::VectorXd::Constant(1, 0.0);
  p.bounds.upper = Eigen::VectorXd::Constant(1, 10.0);
  p.lower = Eigen::MatrixXd::Constant(1, 1, 5.0);
  p.upper = Eigen::MatrixXd::Constant(1, 1, 10.0);
  const auto cells = brute_force_cells(p);
  ASSERT_EQ(cells.size(), 2u);
  for (const auto& c : cells) {
    ASSERT_EQ(c.pieces.size(), 1u);
    const auto& s = c.pieces[0].sides[0];
    if (c.index == 1) {
      EXPECT_EQ(s.lo, 5.0);
      EXPECT_FALSE(s.lo_closed);
      EXPECT_EQ(s.hi, 10.0);
      EXPECT_TRUE(s.hi_closed);
    } else {
      EXPECT_EQ(s.lo, 0.0);
      EXPECT_TRUE(s.lo_closed);
      EXPECT_EQ(s.hi, 5.0);
      EXPECT_TRUE(s.hi_closed);
    }
  }
}

TEST(BruteForce, WorkedExampleHasFourRegions) {
  const auto cells = brute_force_cells(worked_example());
  std::vector<std::uint64_t> idx;
  for (const auto& c : cells) idx.push_back(c.index);
  std::sort(idx.begin(), idx.end());
  // A2 is inside A1, so bit 1 without bit 0 is impossible: indices 0, 1, 3.
  EXPECT_EQ(idx, (std::vector<std::uint64_t>{0, 1, 3}));
}

TEST(BruteForce, AgreesWithCellIndexOnRandomClouds) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 3;
    const int depth = 1 + trial % 6;
    AssetBounds b;
    b.lower = Eigen::VectorXd::Zero(d);
    b.upper = Eigen::VectorXd::LinSpaced(d, 1.0, 3.0);
    auto rng = Rng::stream(static_cast<std::uint64_t>(trial), "partition");
    const auto p = sample_boxes(rng, b, depth);
    const auto cells = brute_force_cells(p);
    for (int k = 0; k < 300; ++k) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x[j] = std::uniform_real_distribution<double>(b.lower[j], b.upper[j])(gen);
      int hits = 0;
      std::uint64_t found = 0;
      for (const auto& c : cells)
        if (c.contains(x)) {
          ++hits;
          found = c.index;
        }
      ASSERT_EQ(hits, 1);
      EXPECT_EQ(found, cell_index(p, x));
    }
  }
}

TEST(CellIndex, RefinementKeepsPointsApart) {
  std::mt19937_64 gen(5);
  AssetBounds b;
  b.lower = Eigen::Vector2d(0, 0);
  b.upper = Eigen::Vector2d(1, 1);
  auto rng = Rng::stream(5, "partition");
  const auto fine = sample_boxes(rng, b, 10);
  BoxPartition coarse = fine;
  coarse.lower = fine.lower.topRows(9);
  coarse.upper = fine.upper.topRows(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Vector2d x(u(gen), u(gen)), y(u(gen), u(gen));
    if (cell_index(coarse, x) != cell_index(coarse, y)) {
      EXPECT_NE(cell_index(fine, x), cell_index(fine, y));
    }
    EXPECT_EQ(cell_index(fine, x) & ((1u << 9) - 1), cell_index(coarse, x));
  }
}

TEST(Partition, JsonRoundTrip) {
  AssetBounds b;
  b.lower = Eigen::Vector2d(80.5, 60);
  b.upper = Eigen::Vector2d(120, 90.25);
  b.delta = 2;
  auto rng = Rng::stream(3, "partition");
  const auto p = sample_boxes(rng, b, 5);
  const auto q = partition_from_json(nlohmann::json::parse(to_json(p).dump()));
  EXPECT_EQ(p.lower, q.lower);
  EXPECT_EQ(p.upper, q.upper);
  EXPECT_EQ(p.bounds.lower, q.bounds.lower);
  EXPECT_EQ(p.bounds.delta, q.bounds.delta);
}

}  // namespace
}  // namespace robarb
