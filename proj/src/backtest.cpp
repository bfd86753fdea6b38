#include "robarb/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "robarb/errors.hpp"

namespace robarb {

const char* const kMetricLabels[7] = {"Overall Profit", "Average Profit", "% of Profitable Trades",
                                      "Max. Profit",    "Min. Profit",    "Sharpe Ratio",
                                      "Sortino Ratio"};

namespace {

void check_test(const PriceSeries& test, int horizon) {
  if (horizon < 1) throw InputError("horizon n must be at least 1");
  if (test.size() < horizon + 1) throw InputError("test series shorter than one window");
}

// Window w rescaled so that its first row equals `spot` in every asset.
Eigen::MatrixXd window_prices(const PriceSeries& test, Eigen::Index w, int horizon, double spot) {
  const Eigen::Index first = w * horizon;
  Eigen::MatrixXd block = test.prices.middleRows(first, horizon + 1);
  const Eigen::RowVectorXd scale = spot * block.row(0).cwiseInverse();
  return block.array().rowwise() * scale.array();
}

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

double metric_value(const Metrics& m, int row) {
  switch (row) {
    case 0: return m.overall_profit;
    case 1: return m.average_profit;
    case 2: return m.pct_profitable;
    case 3: return m.max_profit;
    case 4: return m.min_profit;
    case 5: return m.sharpe;
    default: return m.sortino;
  }
}

double signed_infinity(double mean) {
  if (mean > 0.0) return std::numeric_limits<double>::infinity();
  if (mean < 0.0) return -std::numeric_limits<double>::infinity();
  return 0.0;
}

}  // namespace

Eigen::Index window_count(Eigen::Index prices, int horizon) {
  if (horizon < 1 || prices < 1) return 0;
  return (prices - 1) / horizon;
}

WindowProfits evaluate(const StrategyNet& net, const PriceSeries& test, double spot,
                       const CostSpec& costs, int horizon) {
  check_test(test, horizon);
  if (net.horizon != horizon || net.assets != test.assets())
    throw CompatibilityError("strategy shape does not match the test data");
  const Eigen::Index windows = window_count(test.size(), horizon);
  const Eigen::Index d = test.assets();

  Eigen::MatrixXd paths(horizon * d, windows);
  for (Eigen::Index w = 0; w < windows; ++w) {
    const Eigen::MatrixXd block = window_prices(test, w, horizon, spot);
    paths.col(w) = block.bottomRows(horizon).transpose().reshaped();
  }
  const Eigen::VectorXd spot_vec = Eigen::VectorXd::Constant(d, spot);
  const Eigen::MatrixXd pos = positions(net, paths, NormMode::kRunning).cast<double>();
  const Eigen::RowVectorXd profit = path_profits<double>(pos, paths, spot_vec, costs);

  WindowProfits out;
  for (Eigen::Index w = 0; w < windows; ++w) {
    if (!std::isfinite(profit[w])) throw NumericalError("non-finite window profit");
    out.profits.push_back(profit[w]);
    out.window_starts.push_back(test.dates[static_cast<std::size_t>(w * horizon)]);
  }
  return out;
}

WindowProfits buy_and_hold(const PriceSeries& test, int horizon, const CostSpec& costs,
                           double spot, double units) {
  check_test(test, horizon);
  const Eigen::Index windows = window_count(test.size(), horizon);
  const Eigen::MatrixXd held = Eigen::MatrixXd::Constant(horizon, test.assets(), units);
  WindowProfits out;
  for (Eigen::Index w = 0; w < windows; ++w) {
    const Eigen::MatrixXd block = window_prices(test, w, horizon, spot);
    const double gross = units * (block.row(horizon) - block.row(0)).sum();
    out.profits.push_back(gross - total_costs<double>(costs, held, block));
    out.window_starts.push_back(test.dates[static_cast<std::size_t>(w * horizon)]);
  }
  return out;
}

double one_time_buy_and_hold(const PriceSeries& test, int horizon, const CostSpec& costs,
                             double spot, double units) {
  check_test(test, horizon);
  const Eigen::Index windows = window_count(test.size(), horizon);
  const Eigen::Index last = windows * horizon;
  const Eigen::RowVectorXd scale = spot * test.prices.row(0).cwiseInverse();
  Eigen::MatrixXd ends(2, test.assets());
  ends.row(0) = test.prices.row(0).cwiseProduct(scale);
  ends.row(1) = test.prices.row(last).cwiseProduct(scale);
  const Eigen::MatrixXd held = Eigen::MatrixXd::Constant(1, test.assets(), units);
  const double total = units * (ends.row(1) - ends.row(0)).sum() - total_costs<double>(costs, held, ends);
  return total / static_cast<double>(windows);
}

Metrics metrics(const std::vector<double>& profits) {
  if (profits.empty()) throw InputError("metrics need at least one window");
  const auto count = static_cast<double>(profits.size());
  Metrics m;
  m.overall_profit = std::accumulate(profits.begin(), profits.end(), 0.0);
  m.average_profit = m.overall_profit / count;
  m.pct_profitable =
      100.0 * static_cast<double>(std::count_if(profits.begin(), profits.end(), [](double p) { return p > 0.0; })) /
      count;
  m.max_profit = *std::max_element(profits.begin(), profits.end());
  m.min_profit = *std::min_element(profits.begin(), profits.end());

  double sq = 0.0;
  double down = 0.0;
  for (double p : profits) {
    sq += (p - m.average_profit) * (p - m.average_profit);
    if (p < 0.0) down += p * p;
  }
  const double sd = profits.size() > 1 ? std::sqrt(sq / (count - 1.0)) : 0.0;
  const double dd = std::sqrt(down / count);
  if (sd > 0.0) {
    m.sharpe = m.average_profit / sd;
  } else {
    m.sharpe = signed_infinity(m.average_profit);
    m.sharpe_degenerate = true;
  }
  if (dd > 0.0) {
    m.sortino = m.average_profit / dd;
  } else {
    m.sortino = signed_infinity(m.average_profit);
    m.sortino_degenerate = true;
  }
  return m;
}

Metrics average(const std::vector<Metrics>& runs) {
  if (runs.empty()) throw InputError("nothing to average");
  Metrics out;
  for (const auto& m : runs) {
    out.overall_profit += m.overall_profit;
    out.average_profit += m.average_profit;
    out.pct_profitable += m.pct_profitable;
    out.max_profit += m.max_profit;
    out.min_profit += m.min_profit;
    out.sharpe += m.sharpe;
    out.sortino += m.sortino;
    out.sharpe_degenerate = out.sharpe_degenerate || m.sharpe_degenerate;
    out.sortino_degenerate = out.sortino_degenerate || m.sortino_degenerate;
  }
  const auto r = static_cast<double>(runs.size());
  out.overall_profit /= r;
  out.average_profit /= r;
  out.pct_profitable /= r;
  out.max_profit /= r;
  out.min_profit /= r;
  out.sharpe /= r;
  out.sortino /= r;
  return out;
}

PathMatrix training_paths(const Experiment& exp) {
  const Eigen::VectorXd spot = Eigen::VectorXd::Constant(exp.train.assets(), exp.spot);
  return build_paths(exp.train, spot, exp.horizon);
}

AssetBounds training_bounds(const Experiment& exp, const PathMatrix& paths) {
  if (!(exp.bounds_width > 0.0)) throw InputError("bounds width must be positive");
  return widen(compute_bounds(paths, exp.resolved_delta()), exp.bounds_width);
}

WindowProfits evaluate_online(StrategyNet net, const Experiment& exp, const AssetBounds& bounds,
                              std::vector<TrainingLogRow>* log) {
  check_test(exp.test, exp.horizon);
  if (exp.test.tickers != exp.train.tickers) throw CompatibilityError("train and test tickers differ");
  const Eigen::Index windows = window_count(exp.test.size(), exp.horizon);
  if (exp.train_cfg.online_iters == 0) return evaluate(net, exp.test, exp.spot, exp.costs, exp.horizon);

  // Test rows already contained in the training period are not appended twice.
  Eigen::Index skip = 0;
  if (!exp.train.dates.empty())
    while (skip < exp.test.size() && exp.test.dates[static_cast<std::size_t>(skip)] <= exp.train.dates.back())
      ++skip;

  const Eigen::VectorXd spot = Eigen::VectorXd::Constant(exp.train.assets(), exp.spot);
  WindowProfits out;
  for (Eigen::Index w = 0; w < windows; ++w) {
    const Eigen::Index observed = w * exp.horizon + 1;  // through the window start
    const Eigen::Index extra = std::max<Eigen::Index>(0, observed - skip);
    const PriceSeries augmented = concat(exp.train, slice(exp.test, std::min(skip, observed), extra));
    const PathMatrix paths = build_paths(augmented, spot, exp.horizon);
    std::vector<TrainingLogRow> round_log;
    net = fine_tune_online(std::move(net), paths, bounds, exp.train_cfg, exp.costs,
                           static_cast<std::uint64_t>(w), &round_log);
    if (log) {
      for (auto& row : round_log) {
        row.iter += static_cast<int>(w) * exp.train_cfg.online_iters;
        log->push_back(row);
      }
    }
    const PriceSeries window = slice(exp.test, w * exp.horizon, exp.horizon + 1);
    const WindowProfits one = evaluate(net, window, exp.spot, exp.costs, exp.horizon);
    out.profits.push_back(one.profits.front());
    out.window_starts.push_back(one.window_starts.front());
  }
  return out;
}

Replica run_replica(const Experiment& exp, std::uint64_t seed, bool online) {
  Experiment local = exp;
  local.train_cfg.seed = seed;
  const PathMatrix paths = training_paths(local);
  const AssetBounds bounds = training_bounds(local, paths);

  Replica r;
  r.seed = seed;
  r.trained = train(paths, bounds, local.train_cfg, local.costs);
  r.windows = online ? evaluate_online(r.trained.net, local, bounds, &r.online_log)
                     : evaluate(r.trained.net, local.test, local.spot, local.costs, local.horizon);
  r.metrics = metrics(r.windows);
  return r;
}

std::vector<EquityCurve> equity_quantiles(const std::vector<Replica>& replicas) {
  if (replicas.empty()) return {};
  std::vector<std::vector<double>> cumulative;
  for (const auto& r : replicas) {
    std::vector<double> c(r.windows.profits.size());
    std::partial_sum(r.windows.profits.begin(), r.windows.profits.end(), c.begin());
    cumulative.push_back(std::move(c));
  }
  std::vector<std::size_t> order(replicas.size());
  std::iota(order.begin(), order.end(), 0);
  auto final_value = [&](std::size_t i) { return cumulative[i].empty() ? 0.0 : cumulative[i].back(); };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return final_value(a) < final_value(b); });

  static const std::pair<const char*, double> kRanks[] = {
      {"min", 0.0}, {"q25", 0.25}, {"median", 0.5}, {"q75", 0.75}, {"max", 1.0}};
  std::vector<EquityCurve> out;
  const double last = static_cast<double>(replicas.size() - 1);
  for (const auto& [label, q] : kRanks) {
    const auto idx = order[static_cast<std::size_t>(std::lround(q * last))];
    out.push_back({label, replicas[idx].seed, cumulative[idx]});
  }
  return out;
}

SuiteResult experiment_suite(const Experiment& exp, int n_seeds, int workers, bool online) {
  if (n_seeds < 1) throw InputError("experiment suite needs at least one seed");
  workers = std::clamp(workers, 1, n_seeds);

  SuiteResult result;
  result.replicas.resize(static_cast<std::size_t>(n_seeds));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_seeds));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n_seeds; i = next++) {
      try {
        result.replicas[static_cast<std::size_t>(i)] =
            run_replica(exp, exp.train_cfg.seed + static_cast<std::uint64_t>(i), online);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<Metrics> all;
  for (const auto& r : result.replicas) all.push_back(r.metrics);
  result.averaged = average(all);
  result.curves = equity_quantiles(result.replicas);
  return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsColumn>& columns) {
  out << "metric";
  for (const auto& c : columns) out << ',' << c.name;
  out << '\n';
  for (int row = 0; row < 7; ++row) {
    out << '"' << kMetricLabels[row] << '"';
    for (const auto& c : columns) {
      out << ',';
      if (!c.average_only || row == 1) out << format_number(metric_value(c.metrics, row));
    }
    out << '\n';
  }
}

nlohmann::json metrics_json(const std::vector<MetricsColumn>& columns) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& c : columns) {
    nlohmann::json col = nlohmann::json::object();
    for (int row = 0; row < 7; ++row)
      if (!c.average_only || row == 1) col[kMetricLabels[row]] = json_number(metric_value(c.metrics, row));
    if (!c.average_only) {
      col["sharpe_degenerate"] = c.metrics.sharpe_degenerate;
      col["sortino_degenerate"] = c.metrics.sortino_degenerate;
    }
    j[c.name] = std::move(col);
  }
  return j;
}

void write_equity_csv(std::ostream& out, const std::vector<EquityCurve>& curves) {
  out << "seed_rank_quantile,window_index,cumulative_profit\n";
  for (const auto& c : curves)
    for (std::size_t w = 0; w < c.cumulative.size(); ++w)
      out << c.quantile << ',' << w << ',' << format_number(c.cumulative[w]) << '\n';
}

void write_window_csv(std::ostream& out, const WindowProfits& w) {
  out << "window_index,window_start,profit\n";
  for (std::size_t i = 0; i < w.size(); ++i)
    out << i << ',' << w.window_starts[i] << ',' << format_number(w.profits[i]) << '\n';
}

}  // namespace robarb
