#include "robarb/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "robarb/checkpoint.hpp"
#include "robarb/errors.hpp"

namespace robarb {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string csv_header(const char* kind) {
  return std::string("# robarb ") + kind + " schema " + std::to_string(kSchemaVersion) + "\n";
}

void write_file(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write " + file.string());
  out << text;
  if (!out) throw InputError("write failed: " + file.string());
}

void write_json(const fs::path& file, json j, const char* kind) {
  j["schema"] = std::string("robarb.") + kind;
  j["schema_version"] = kSchemaVersion;
  write_file(file, j.dump(2) + "\n");
}

void prepare(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw InputError("cannot create output directory " + out.string() + ": " + ec.message());
}

void write_metadata(const fs::path& out, const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  write_json(out / (command + ".metadata.json"), {{"command", command}, {"finished_utc", stamp}}, "metadata");
}

PriceSeries load(const fs::path& file, const RunConfig& cfg, const char* role, std::ostream& log) {
  if (file.empty()) throw InputError(std::string("data.") + role + " is not set");
  auto loaded = load_series(file, cfg.tickers);
  if (loaded.dropped_rows > 0)
    log << role << ": dropped " << loaded.dropped_rows << " incomplete rows from " << file.string() << '\n';
  return std::move(loaded.series);
}

std::string number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return std::sqrt(sq / static_cast<double>(v.size() - 1));
}

std::vector<MetricsColumn> metric_columns(const Metrics& strategy, const Experiment& exp, const RunConfig& cfg) {
  std::vector<MetricsColumn> cols{{"strategy", strategy}};
  if (cfg.baselines) {
    cols.push_back({"buy_and_hold", metrics(buy_and_hold(exp.test, exp.horizon, exp.costs, exp.spot, cfg.baseline_units))});
    Metrics once;
    once.average_profit = one_time_buy_and_hold(exp.test, exp.horizon, exp.costs, exp.spot, cfg.baseline_units);
    cols.push_back({"one_time_buy_and_hold", once, true});
  }
  return cols;
}

void write_tables(const fs::path& out, const std::string& prefix, const std::vector<MetricsColumn>& cols,
                  const WindowProfits* windows, const std::vector<EquityCurve>& curves) {
  std::ostringstream csv;
  csv << csv_header("metrics");
  write_metrics_csv(csv, cols);
  write_file(out / (prefix + "metrics.csv"), csv.str());
  write_json(out / (prefix + "metrics.json"), {{"columns", metrics_json(cols)}}, "metrics");
  if (windows) {
    std::ostringstream w;
    w << csv_header("windows");
    write_window_csv(w, *windows);
    write_file(out / (prefix + "windows.csv"), w.str());
  }
  std::ostringstream e;
  e << csv_header("equity");
  write_equity_csv(e, curves);
  write_file(out / (prefix + "equity.csv"), e.str());
}

std::string training_log_csv(const std::vector<TrainingLogRow>& log) {
  std::ostringstream s;
  s << csv_header("training_log");
  write_training_log(s, log);
  return s.str();
}

Checkpoint make_checkpoint(const TrainResult& trained, const AssetBounds& bounds, const Experiment& exp,
                           const RunConfig& cfg) {
  RunConfig seeded = cfg;
  seeded.train.seed = exp.train_cfg.seed;
  return {trained.net, bounds, trained.partition, exp.train.tickers, model_hash(seeded)};
}

Checkpoint load_compatible(const fs::path& file, const Experiment& exp) {
  Checkpoint cp = load_checkpoint(file);
  check_compatible(cp.net, static_cast<int>(exp.test.assets()), exp.horizon, exp.train_cfg.bound);
  if (cp.tickers != exp.test.tickers) throw CompatibilityError("checkpoint tickers do not match the test data");
  return cp;
}

void backtest_impl(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& out, std::ostream& log,
                   bool online) {
  const Experiment exp = make_experiment(cfg);
  Checkpoint cp = load_compatible(checkpoint, exp);
  prepare(out);

  Replica r;
  r.seed = exp.train_cfg.seed;
  if (online) {
    log << "online backtest: " << window_count(exp.test.size(), exp.horizon) << " windows, "
        << exp.train_cfg.online_iters << " fine-tune iterations each\n";
    r.windows = evaluate_online(cp.net, exp, cp.bounds, &r.online_log);
  } else {
    r.windows = evaluate(cp.net, exp.test, exp.spot, exp.costs, exp.horizon);
  }
  r.metrics = metrics(r.windows);
  const std::string prefix = online ? "online_" : "";
  write_tables(out, prefix, metric_columns(r.metrics, exp, cfg), &r.windows, equity_quantiles({r}));
  if (online) write_file(out / "online_training_log.csv", training_log_csv(r.online_log));
  write_metadata(out, online ? "online-backtest" : "backtest");
  log << "average profit " << number(r.metrics.average_profit) << ", sharpe " << number(r.metrics.sharpe) << '\n';
}

}  // namespace

int exit_code_for(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const InputError&) {
    return kExitInput;
  } catch (const CompatibilityError&) {
    return kExitCompatibility;
  } catch (const NumericalError&) {
    return kExitNumerical;
  } catch (...) {
    return kExitFailure;
  }
}

fs::path resolve_output_dir(const RunConfig& cfg, const std::optional<fs::path>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return cfg.output_dir;
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "epsilon") return SweepAxis::kEpsilon;
  if (name == "bounds_width" || name == "bounds-width") return SweepAxis::kBoundsWidth;
  throw InputError("unknown sweep axis '" + name + "' (epsilon or bounds_width)");
}

Experiment make_experiment(const RunConfig& cfg) {
  cfg.validate();
  std::ostringstream sink;
  Experiment exp;
  exp.train = load(cfg.train_csv, cfg, "train", sink);
  exp.test = load(cfg.test_csv, cfg, "test", sink);
  if (exp.train.tickers != exp.test.tickers) throw InputError("train and test files carry different tickers");
  exp.horizon = cfg.horizon;
  exp.spot = cfg.spot;
  exp.delta = cfg.delta;
  exp.bounds_width = cfg.bounds_width;
  exp.train_cfg = cfg.train;
  exp.costs = cfg.costs;
  if (exp.train.size() <= exp.horizon) throw InputError("training series needs more than n prices");
  return exp;
}

void cmd_ingest(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  prepare(out);
  json files = json::array();
  for (const auto& [role, file] : {std::pair{"train", cfg.train_csv}, std::pair{"test", cfg.test_csv}}) {
    if (file.empty()) continue;
    const auto loaded = load_series(file, cfg.tickers);
    const auto& s = loaded.series;
    files.push_back({{"role", role},
                     {"path", file.string()},
                     {"rows", s.size()},
                     {"assets", s.assets()},
                     {"tickers", s.tickers},
                     {"dropped_rows", loaded.dropped_rows},
                     {"first_date", s.dates.front()},
                     {"last_date", s.dates.back()},
                     {"windows", window_count(s.size(), cfg.horizon)}});
    std::ostringstream csv;
    write_series_csv(csv, s);
    write_file(out / (std::string(role) + "_clean.csv"), csv.str());
    log << role << ": " << s.size() << " rows, " << s.assets() << " assets, " << loaded.dropped_rows
        << " dropped\n";
  }
  if (files.empty()) throw InputError("no data files configured");
  write_json(out / "ingest.json", {{"files", files}}, "ingest");
  write_metadata(out, "ingest");
}

void cmd_train(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  Experiment exp = make_experiment(cfg);
  prepare(out);
  const PathMatrix paths = training_paths(exp);
  const AssetBounds bounds = training_bounds(exp, paths);
  log << "training on " << paths.count() << " paths (d=" << paths.assets << ", n=" << paths.horizon
      << ") for " << exp.train_cfg.n_iter << " iterations, seed " << exp.train_cfg.seed << '\n';
  const TrainResult trained = train(paths, bounds, exp.train_cfg, exp.costs);

  save_checkpoint(out / "checkpoint.json", make_checkpoint(trained, bounds, exp, cfg));
  write_file(out / "training_log.csv", training_log_csv(trained.log));
  json echo = config_json(cfg);
  echo["model_hash"] = model_hash(cfg);
  write_json(out / "config.json", echo, "config");
  write_metadata(out, "train");
  if (!trained.log.empty())
    log << "final loss " << number(trained.log.back().loss) << ", c " << number(static_cast<double>(trained.net.cash))
        << '\n';
}

void cmd_backtest(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& out, std::ostream& log) {
  backtest_impl(cfg, checkpoint, out, log, false);
}

void cmd_online_backtest(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& out,
                         std::ostream& log) {
  backtest_impl(cfg, checkpoint, out, log, true);
}

void cmd_sweep(const RunConfig& cfg, SweepAxis axis, const fs::path& out, std::ostream& log) {
  const auto& grid = axis == SweepAxis::kEpsilon ? cfg.sweep_epsilon : cfg.sweep_bounds_width;
  const char* name = axis == SweepAxis::kEpsilon ? "epsilon" : "bounds_width";
  if (grid.empty()) throw InputError(std::string("sweep.") + name + " grid is empty");
  const Experiment base = make_experiment(cfg);
  prepare(out);

  std::ostringstream csv;
  csv << csv_header("sweep");
  csv << "axis,value,seed,overall_profit,average_profit,std_profit,sharpe,sortino,pct_profitable,cash\n";
  for (double value : grid) {
    Experiment exp = base;
    if (axis == SweepAxis::kEpsilon) exp.train_cfg.epsilon = value;
    else exp.bounds_width = value;
    log << "sweep " << name << " = " << number(value) << " (" << cfg.sweep_seeds << " seeds)\n";
    const SuiteResult suite = experiment_suite(exp, cfg.sweep_seeds, cfg.workers);
    for (const auto& r : suite.replicas) {
      const auto& m = r.metrics;
      csv << name << ',' << number(value) << ',' << r.seed << ',' << number(m.overall_profit) << ','
          << number(m.average_profit) << ',' << number(sample_std(r.windows.profits)) << ',' << number(m.sharpe)
          << ',' << number(m.sortino) << ',' << number(m.pct_profitable) << ','
          << number(static_cast<double>(r.trained.net.cash)) << '\n';
    }
  }
  write_file(out / (std::string("sweep_") + name + ".csv"), csv.str());
  write_metadata(out, std::string("sweep-") + name);
}

void cmd_report(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const Experiment exp = make_experiment(cfg);
  prepare(out);
  log << "experiment suite: " << cfg.n_seeds << " seeds from " << exp.train_cfg.seed << ", " << cfg.workers
      << " workers\n";
  const SuiteResult suite = experiment_suite(exp, cfg.n_seeds, cfg.workers);

  const fs::path replicas = out / "replicas";
  prepare(replicas);
  const PathMatrix paths = training_paths(exp);
  const AssetBounds bounds = training_bounds(exp, paths);
  std::ostringstream table;
  table << csv_header("replicas");
  table << "seed,overall_profit,average_profit,pct_profitable,max_profit,min_profit,sharpe,sortino,cash,"
           "final_penalty\n";
  for (const auto& r : suite.replicas) {
    Experiment seeded = exp;
    seeded.train_cfg.seed = r.seed;
    const std::string stem = "seed_" + std::to_string(r.seed);
    save_checkpoint(replicas / (stem + ".json"), make_checkpoint(r.trained, bounds, seeded, cfg));
    write_file(replicas / (stem + "_training_log.csv"), training_log_csv(r.trained.log));
    const auto& m = r.metrics;
    const double penalty = r.trained.log.empty() ? 0.0 : r.trained.log.back().penalty;
    table << r.seed << ',' << number(m.overall_profit) << ',' << number(m.average_profit) << ','
          << number(m.pct_profitable) << ',' << number(m.max_profit) << ',' << number(m.min_profit) << ','
          << number(m.sharpe) << ',' << number(m.sortino) << ',' << number(static_cast<double>(r.trained.net.cash))
          << ',' << number(penalty) << '\n';
  }
  write_file(out / "report_replicas.csv", table.str());
  write_tables(out, "report_", metric_columns(suite.averaged, exp, cfg), nullptr, suite.curves);
  write_metadata(out, "report");
  log << "averaged over " << suite.replicas.size() << " replicas: average profit "
      << number(suite.averaged.average_profit) << ", sharpe " << number(suite.averaged.sharpe) << '\n';
}

}  // namespace robarb
