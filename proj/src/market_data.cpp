#include "robarb/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "robarb/errors.hpp"

namespace robarb {

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& c : cells) {
    while (!c.empty() && (c.front() == ' ' || c.front() == '\t')) c.remove_prefix(1);
    while (!c.empty() && (c.back() == ' ' || c.back() == '\t' || c.back() == '\r'))
      c.remove_suffix(1);
  }
  return cells;
}

bool is_missing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" ||
         cell == "null" || cell == "N/A";
}

double parse_price(std::string_view cell, std::size_t line_no) {
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InputError("parse failure at line " + std::to_string(line_no) + ": '" +
                     std::string(cell) + "' is not a number");
  }
  return value;
}

}  // namespace

void PriceSeries::validate() const {
  if (static_cast<Eigen::Index>(dates.size()) != prices.rows())
    throw InputError("date count does not match price rows");
  if (static_cast<Eigen::Index>(tickers.size()) != prices.cols())
    throw InputError("ticker count does not match price columns");
  for (std::size_t t = 1; t < dates.size(); ++t) {
    if (!(dates[t - 1] < dates[t]))
      throw InputError("dates not strictly increasing at '" + dates[t] + "'");
  }
  if (prices.size() > 0 && !(prices.array() > 0.0).all())
    throw InputError("nonpositive price");
  if (!prices.allFinite()) throw InputError("non-finite price");
}

LoadResult load_series(const std::filesystem::path& file,
                       std::span<const std::string> tickers) {
  std::ifstream in(file);
  if (!in) throw InputError("data not found: " + file.string());

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw InputError("parse failure: empty file " + file.string());
  ++line_no;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);

  const auto header = split_csv_line(line);
  if (header.size() < 2) throw InputError("parse failure: header needs date and tickers");

  std::vector<std::size_t> columns;
  std::vector<std::string> names;
  if (tickers.empty()) {
    for (std::size_t c = 1; c < header.size(); ++c) {
      columns.push_back(c);
      names.emplace_back(header[c]);
    }
  } else {
    for (const auto& t : tickers) {
      const auto it = std::find(header.begin() + 1, header.end(), t);
      if (it == header.end()) throw InputError("parse failure: ticker '" + t + "' not in header");
      columns.push_back(static_cast<std::size_t>(it - header.begin()));
      names.push_back(t);
    }
  }

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::size_t dropped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw InputError("parse failure at line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " cells");
    }
    std::vector<double> values;
    values.reserve(columns.size());
    bool missing = false;
    for (auto c : columns) {
      if (is_missing(cells[c])) {
        missing = true;
        break;
      }
      const double v = parse_price(cells[c], line_no);
      if (!(v > 0.0)) throw InputError("nonpositive price at line " + std::to_string(line_no));
      values.push_back(v);
    }
    if (missing) {
      ++dropped;
      continue;
    }
    rows.emplace_back(std::string(cells[0]), std::move(values));
  }
  if (rows.empty()) throw InputError("empty intersection of dates in " + file.string());

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  LoadResult result;
  auto& s = result.series;
  s.tickers = std::move(names);
  s.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    s.dates.push_back(rows[r].first);
    for (std::size_t c = 0; c < columns.size(); ++c)
      s.prices(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].second[c];
  }
  s.validate();
  result.dropped_rows = dropped;
  return result;
}

void write_series_csv(std::ostream& out, const PriceSeries& series) {
  out << "date";
  for (const auto& t : series.tickers) out << ',' << t;
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < series.size(); ++r) {
    out << series.dates[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < series.assets(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", series.prices(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

PriceSeries normalize_spot(const PriceSeries& series, double target_spot) {
  if (series.size() == 0) throw InputError("cannot normalize an empty series");
  if (!(target_spot > 0.0)) throw InputError("target spot must be positive");
  PriceSeries out = series;
  for (Eigen::Index j = 0; j < out.assets(); ++j) {
    const double last = series.prices(series.size() - 1, j);
    out.prices.col(j) = series.prices.col(j) * (target_spot / last);
    // exact at the anchor regardless of rounding in the scale factor
    out.prices(series.size() - 1, j) = target_spot;
  }
  return out;
}

PriceSeries concat(const PriceSeries& head, const PriceSeries& tail) {
  if (head.tickers != tail.tickers) throw InputError("cannot concatenate series with different tickers");
  PriceSeries out;
  out.tickers = head.tickers;
  out.dates = head.dates;
  out.dates.insert(out.dates.end(), tail.dates.begin(), tail.dates.end());
  out.prices.resize(head.size() + tail.size(), head.assets());
  out.prices << head.prices, tail.prices;
  return out;
}

PriceSeries slice(const PriceSeries& series, Eigen::Index first, Eigen::Index count) {
  if (first < 0 || count < 0 || first + count > series.size())
    throw InputError("slice out of range");
  PriceSeries out;
  out.tickers = series.tickers;
  out.dates.assign(series.dates.begin() + first, series.dates.begin() + first + count);
  out.prices = series.prices.middleRows(first, count);
  return out;
}

bool AssetBounds::contains(const Eigen::Ref<const Eigen::VectorXd>& point) const {
  return (point.array() >= lower.array()).all() && (point.array() <= upper.array()).all();
}

PathMatrix build_paths(const Eigen::MatrixXd& prices, const Eigen::VectorXd& spot,
                       int horizon) {
  const Eigen::Index rows = prices.rows();
  const Eigen::Index d = prices.cols();
  if (horizon < 1) throw InputError("horizon must be at least 1");
  if (rows <= horizon)
    throw InputError("need more than n = " + std::to_string(horizon) + " observations, got " +
                     std::to_string(rows));
  if (spot.size() != d) throw InputError("spot dimension does not match assets");
  if (!(spot.array() > 0.0).all()) throw InputError("spot must be positive");

  PathMatrix out;
  out.horizon = horizon;
  out.assets = static_cast<int>(d);
  out.spot = spot;
  const Eigen::Index count = rows - horizon;
  out.values.resize(horizon * d, count);
  for (Eigen::Index l = 0; l < count; ++l) {
    for (int i = 1; i <= horizon; ++i) {
      for (Eigen::Index j = 0; j < d; ++j)
        out.values((i - 1) * d + j, l) = spot[j] * prices(l + i, j) / prices(l, j);
    }
  }
  return out;
}

PathMatrix build_paths(const PriceSeries& series, const Eigen::VectorXd& spot, int horizon) {
  return build_paths(series.prices, spot, horizon);
}

AssetBounds compute_bounds(const PathMatrix& paths, double delta) {
  if (paths.count() == 0) throw InputError("cannot bound an empty path set");
  if (!(delta >= 0.0)) throw InputError("delta must be nonnegative");
  const int d = paths.assets;
  AssetBounds b;
  b.delta = delta;
  b.lower = paths.spot;
  b.upper = paths.spot;
  for (int i = 0; i < paths.horizon; ++i) {
    const auto block = paths.values.middleRows(static_cast<Eigen::Index>(i) * d, d);
    b.lower = b.lower.cwiseMin(block.rowwise().minCoeff());
    b.upper = b.upper.cwiseMax(block.rowwise().maxCoeff());
  }
  b.lower.array() -= delta;
  b.upper.array() += delta;
  return b;
}

AssetBounds widen(const AssetBounds& bounds, double factor) {
  if (!(factor > 0.0)) throw InputError("bounds width factor must be positive");
  const Eigen::VectorXd center = 0.5 * (bounds.lower + bounds.upper);
  const Eigen::VectorXd half = 0.5 * (bounds.upper - bounds.lower);
  AssetBounds out;
  out.lower = center - factor * half;
  out.upper = center + factor * half;
  out.delta = bounds.delta + (factor - 1.0) * (half.size() > 0 ? half[0] : 0.0);
  return out;
}

AssetBounds hull(const AssetBounds& a, const AssetBounds& b) {
  AssetBounds out;
  out.lower = a.lower.cwiseMin(b.lower);
  out.upper = a.upper.cwiseMax(b.upper);
  out.delta = std::max(a.delta, b.delta);
  return out;
}

}  // namespace robarb
