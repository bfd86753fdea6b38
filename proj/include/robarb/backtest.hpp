#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robarb/costs.hpp"
#include "robarb/market_data.hpp"
#include "robarb/trainer.hpp"

namespace robarb {

// Net profit of every test window. Window w spans prices w*n .. w*n + n of
// the test series; the trailing remainder shorter than n steps is dropped.
struct WindowProfits {
  std::vector<double> profits;
  std::vector<std::string> window_starts;

  std::size_t size() const { return profits.size(); }
};

struct Metrics {
  double overall_profit = 0.0;
  double average_profit = 0.0;
  double pct_profitable = 0.0;
  double max_profit = 0.0;
  double min_profit = 0.0;
  double sharpe = 0.0;
  double sortino = 0.0;
  bool sharpe_degenerate = false;   // zero standard deviation
  bool sortino_degenerate = false;  // no losing window
};

// Number of complete n-step windows in a series of `prices` rows.
Eigen::Index window_count(Eigen::Index prices, int horizon);

// Runs the frozen strategy (running normalization statistics) on each
// window after rescaling the window-start prices to `spot`.
WindowProfits evaluate(const StrategyNet& net, const PriceSeries& test, double spot,
                       const CostSpec& costs, int horizon);

// Holds `units` of every asset inside each window; costs on open and close.
WindowProfits buy_and_hold(const PriceSeries& test, int horizon, const CostSpec& costs,
                           double spot = 100.0, double units = 10.0);

// Opens once at the first test price and closes at the end of the last
// complete window; returns the total profit divided by the window count.
double one_time_buy_and_hold(const PriceSeries& test, int horizon, const CostSpec& costs,
                             double spot = 100.0, double units = 10.0);

// Sharpe = mean / sample std (n - 1); Sortino = mean / sqrt(mean(min(p, 0)^2)).
// Zero denominators give +-inf (or 0 for a zero mean) with the flag set.
Metrics metrics(const std::vector<double>& profits);
inline Metrics metrics(const WindowProfits& w) { return metrics(w.profits); }

Metrics average(const std::vector<Metrics>& runs);

// Everything needed to train and test one replica.
struct Experiment {
  PriceSeries train;
  PriceSeries test;
  int horizon = 9;
  double spot = 100.0;
  std::optional<double> delta;  // default: the resolved epsilon
  double bounds_width = 1.0;    // multiplier on the data-implied box
  TrainConfig train_cfg;
  CostSpec costs;

  double resolved_delta() const {
    return delta.value_or(train_cfg.resolved_epsilon(static_cast<int>(train.assets())));
  }
};

PathMatrix training_paths(const Experiment& exp);
AssetBounds training_bounds(const Experiment& exp, const PathMatrix& paths);

// Before window w (w = 0, 1, ...) the strategy is fine-tuned for
// cfg.online_iters iterations on the training prices followed by the test
// prices observed up to the start of window w; the window is then traded
// with the updated strategy. Fine-tuning is cumulative across windows.
WindowProfits evaluate_online(StrategyNet net, const Experiment& exp, const AssetBounds& bounds,
                              std::vector<TrainingLogRow>* log = nullptr);

struct Replica {
  std::uint64_t seed = 0;
  TrainResult trained;
  WindowProfits windows;
  Metrics metrics;
  std::vector<TrainingLogRow> online_log;
};

Replica run_replica(const Experiment& exp, std::uint64_t seed, bool online = false);

struct EquityCurve {
  std::string quantile;  // min, q25, median, q75, max
  std::uint64_t seed = 0;
  std::vector<double> cumulative;
};

struct SuiteResult {
  std::vector<Replica> replicas;  // in seed order
  Metrics averaged;
  std::vector<EquityCurve> curves;
};

// Replicas use seeds base + 0 .. base + n_seeds - 1 (base = exp.train_cfg.seed)
// and run on up to `workers` threads; results do not depend on `workers`.
SuiteResult experiment_suite(const Experiment& exp, int n_seeds, int workers = 1,
                             bool online = false);

// Replicas ranked by final cumulative profit; the curves at ranks
// round(q * (R - 1)) for q in {0, .25, .5, .75, 1}.
std::vector<EquityCurve> equity_quantiles(const std::vector<Replica>& replicas);

// Table with the metric row labels as rows and one column per entry.
// average_only columns (one-time B&H) fill the Average Profit row only.
struct MetricsColumn {
  std::string name;
  Metrics metrics;
  bool average_only = false;
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricsColumn>& columns);
nlohmann::json metrics_json(const std::vector<MetricsColumn>& columns);
void write_equity_csv(std::ostream& out, const std::vector<EquityCurve>& curves);
void write_window_csv(std::ostream& out, const WindowProfits& w);

extern const char* const kMetricLabels[7];

}  // namespace robarb
