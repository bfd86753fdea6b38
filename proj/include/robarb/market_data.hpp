#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace robarb {

// Aligned multi-asset price history. Row t of `prices` holds the d asset
// prices observed on dates[t]; all entries are strictly positive and dates
// are strictly increasing.
struct PriceSeries {
  std::vector<std::string> dates;
  Eigen::MatrixXd prices;  // N x d
  std::vector<std::string> tickers;

  Eigen::Index size() const { return prices.rows(); }
  Eigen::Index assets() const { return prices.cols(); }

  // Throws InputError when an invariant is broken.
  void validate() const;
};

struct LoadResult {
  PriceSeries series;
  std::size_t dropped_rows = 0;
};

// Reads `date,T1,...,Td` CSV. Columns are restricted to `tickers` (all columns
// when empty). Rows with any empty / NA / NaN cell in a selected column are
// dropped and counted.
LoadResult load_series(const std::filesystem::path& file,
                       std::span<const std::string> tickers = {});

// Writes the `date,T1,...,Td` layout read by load_series.
void write_series_csv(std::ostream& out, const PriceSeries& series);

// Scales every column so its last price equals `target_spot`.
PriceSeries normalize_spot(const PriceSeries& series, double target_spot = 100.0);

// Appends the rows of `tail` to `head`. Tickers must agree.
PriceSeries concat(const PriceSeries& head, const PriceSeries& tail);

// Rows [first, first + count) of a series.
PriceSeries slice(const PriceSeries& series, Eigen::Index first, Eigen::Index count);

// Price box Omega: [lower_j, upper_j] per asset.
struct AssetBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double delta = 0.0;

  Eigen::Index assets() const { return lower.size(); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& point) const;
};

// Rescaled historical future paths anchored at a common spot.
//
// Layout: `values` is (n*d) x P, one column per path. Row i*d + j is asset j
// at step i+1, so the first i*d rows of a column are exactly the observations
// a position at step i may depend on.
struct PathMatrix {
  Eigen::MatrixXd values;
  Eigen::VectorXd spot;
  int horizon = 0;
  int assets = 0;

  Eigen::Index count() const { return values.cols(); }
  double at(Eigen::Index path, int step, int asset) const {
    return values(static_cast<Eigen::Index>(step - 1) * assets + asset, path);
  }
  auto terminal() const { return values.bottomRows(assets); }
};

// Path l, step i, asset j = spot[j] * Y[l + i][j] / Y[l][j], i = 1..n.
PathMatrix build_paths(const Eigen::MatrixXd& prices, const Eigen::VectorXd& spot,
                       int horizon);
PathMatrix build_paths(const PriceSeries& series, const Eigen::VectorXd& spot,
                       int horizon);

// Min/max over all path values and the spot, padded by delta on each side.
AssetBounds compute_bounds(const PathMatrix& paths, double delta);

// Scales each asset's box about its center by `factor`; delta grows by the
// added half-width of the first asset (informational only).
AssetBounds widen(const AssetBounds& bounds, double factor);

// Smallest box containing both.
AssetBounds hull(const AssetBounds& a, const AssetBounds& b);

}  // namespace robarb
