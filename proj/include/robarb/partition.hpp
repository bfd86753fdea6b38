#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "robarb/market_data.hpp"
#include "robarb/rng.hpp"

namespace robarb {

// Family of half-open boxes A_i = (a_i, b_i] inside the price box Omega.
// Box i contributes bit 2^i to the cell index of a terminal value, so the
// boxes induce a partition of Omega into at most 2^depth cells.
struct BoxPartition {
  Eigen::MatrixXd lower;  // depth x d, open corners a
  Eigen::MatrixXd upper;  // depth x d, closed corners b
  AssetBounds bounds;

  int depth() const { return static_cast<int>(lower.rows()); }
  int assets() const { return static_cast<int>(bounds.assets()); }
};

inline constexpr int kMaxPartitionDepth = 63;

// a ~ U[lower_j, upper_j] i.i.d., b = upper_j. Draw order is box-major.
BoxPartition sample_boxes(Rng& rng, const AssetBounds& bounds, int depth);

// Coordinate test a < x <= b, counted as one comparison by the complexity
// probe in the tests.
struct HalfOpenTest {
  bool operator()(double a, double b, double x) const { return a < x && x <= b; }
};

// Cell of a terminal value. Evaluates every box on every coordinate, i.e.
// exactly depth * d calls to `test`. Throws OutOfBoundsError when the point
// is outside the partition's bounds.
template <class Test = HalfOpenTest>
std::uint64_t cell_index(const BoxPartition& partition,
                         const Eigen::Ref<const Eigen::VectorXd>& terminal, Test&& test = {});

// Cell indices of each column of a d x P terminal matrix.
std::vector<std::uint64_t> cell_indices(const BoxPartition& partition,
                                        const Eigen::Ref<const Eigen::MatrixXd>& terminals);

// Oracle: the explicit intersection/complement construction of the cells.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool empty() const { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }
  bool contains(double x) const {
    return (lo_closed ? x >= lo : x > lo) && (hi_closed ? x <= hi : x < hi);
  }
};

struct IntervalBox {
  std::vector<Interval> sides;

  bool empty() const;
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct CellRegion {
  std::uint64_t index = 0;
  std::vector<IntervalBox> pieces;  // pairwise disjoint

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Nonempty regions of E_depth. Exponential; guarded to d <= 3, depth <= 8.
std::vector<CellRegion> brute_force_cells(const BoxPartition& partition);

nlohmann::json to_json(const BoxPartition& partition);
BoxPartition partition_from_json(const nlohmann::json& j);

}  // namespace robarb

#include "robarb/partition_impl.hpp"
