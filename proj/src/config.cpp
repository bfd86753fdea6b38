#include "robarb/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "robarb/errors.hpp"
#include "robarb/rng.hpp"

namespace robarb {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& section, const char* name, std::initializer_list<const char*> keys) {
  if (!section.is_object()) throw InputError(std::string("config section '") + name + "' must be an object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [key, value] : section.items())
    if (!known.count(key)) throw InputError(std::string("unknown config key '") + name + "." + key + "'");
}

template <typename T>
void read(const json& section, const char* key, T& into) {
  if (section.contains(key)) into = section.at(key).get<T>();
}

template <typename T>
void read(const json& section, const char* key, std::optional<T>& into) {
  if (section.contains(key)) {
    if (section.at(key).is_null()) into.reset();
    else into = section.at(key).get<T>();
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

void RunConfig::validate() const {
  if (horizon < 1) throw InputError("data.horizon must be at least 1");
  if (!(spot > 0.0)) throw InputError("data.spot must be positive");
  if (delta && !(*delta >= 0.0)) throw InputError("data.delta must be nonnegative");
  if (!(bounds_width > 0.0)) throw InputError("data.bounds_width must be positive");
  if (n_seeds < 1) throw InputError("backtest.n_seeds must be at least 1");
  if (workers < 1) throw InputError("backtest.workers must be at least 1");
  if (sweep_seeds < 1) throw InputError("sweep.n_seeds must be at least 1");
  if (!(baseline_units > 0.0)) throw InputError("backtest.units must be positive");
  for (double e : sweep_epsilon)
    if (!(e >= 0.0)) throw InputError("sweep.epsilon values must be nonnegative");
  for (double w : sweep_bounds_width)
    if (!(w > 0.0)) throw InputError("sweep.bounds_width values must be positive");
  costs.validate();
  train.validate();
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  try {
    reject_unknown(j, "<root>", {"schema_version", "data", "costs", "train", "backtest", "sweep", "output"});
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
      throw CompatibilityError("unsupported config schema_version");

    if (j.contains("data")) {
      const auto& d = j.at("data");
      reject_unknown(d, "data", {"train", "test", "tickers", "horizon", "spot", "delta", "bounds_width"});
      std::string train, test;
      read(d, "train", train);
      read(d, "test", test);
      cfg.train_csv = resolve(base_dir, train);
      cfg.test_csv = resolve(base_dir, test);
      read(d, "tickers", cfg.tickers);
      read(d, "horizon", cfg.horizon);
      read(d, "spot", cfg.spot);
      read(d, "delta", cfg.delta);
      read(d, "bounds_width", cfg.bounds_width);
    }
    if (j.contains("costs")) {
      const auto& c = j.at("costs");
      reject_unknown(c, "costs", {"mode", "trans_lambda", "spread_lambda", "short_lambda"});
      std::string mode = "per_share";
      read(c, "mode", mode);
      const auto m = transaction_mode_from_string(mode);
      cfg.costs = m == TransactionMode::kProportional ? CostSpec::proportional()
                  : m == TransactionMode::kPerShare  ? CostSpec::per_share()
                                                     : CostSpec::zero();
      read(c, "trans_lambda", cfg.costs.trans_lambda);
      read(c, "spread_lambda", cfg.costs.spread_lambda);
      read(c, "short_lambda", cfg.costs.short_lambda);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      reject_unknown(t, "train", {"n_iter", "k", "epsilon", "n_measures", "depth", "learning_rate", "bound",
                                  "seed", "online_iters", "hidden_widths", "optimizer"});
      read(t, "n_iter", cfg.train.n_iter);
      read(t, "k", cfg.train.k);
      read(t, "epsilon", cfg.train.epsilon);
      read(t, "n_measures", cfg.train.n_measures);
      read(t, "depth", cfg.train.depth);
      read(t, "learning_rate", cfg.train.learning_rate);
      read(t, "bound", cfg.train.bound);
      read(t, "seed", cfg.train.seed);
      read(t, "online_iters", cfg.train.online_iters);
      read(t, "hidden_widths", cfg.train.hidden_widths);
      if (t.contains("optimizer")) cfg.train.optimizer = optimizer_from_string(t.at("optimizer").get<std::string>());
    }
    if (j.contains("backtest")) {
      const auto& b = j.at("backtest");
      reject_unknown(b, "backtest", {"baselines", "units", "n_seeds", "workers"});
      read(b, "baselines", cfg.baselines);
      read(b, "units", cfg.baseline_units);
      read(b, "n_seeds", cfg.n_seeds);
      read(b, "workers", cfg.workers);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      reject_unknown(s, "sweep", {"epsilon", "bounds_width", "n_seeds"});
      read(s, "epsilon", cfg.sweep_epsilon);
      read(s, "bounds_width", cfg.sweep_bounds_width);
      read(s, "n_seeds", cfg.sweep_seeds);
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      reject_unknown(o, "output", {"dir"});
      std::string dir;
      read(o, "dir", dir);
      if (!dir.empty()) cfg.output_dir = resolve(base_dir, dir);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("config not found: " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("config is not valid JSON: " + file.string());
  }
  return config_from_json(j, file.parent_path());
}

json config_json(const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["data"] = {{"train", cfg.train_csv.string()},
               {"test", cfg.test_csv.string()},
               {"tickers", cfg.tickers},
               {"horizon", cfg.horizon},
               {"spot", cfg.spot},
               {"delta", optional_json(cfg.delta)},
               {"bounds_width", cfg.bounds_width}};
  j["costs"] = {{"mode", to_string(cfg.costs.mode)},
                {"trans_lambda", cfg.costs.trans_lambda},
                {"spread_lambda", cfg.costs.spread_lambda},
                {"short_lambda", cfg.costs.short_lambda}};
  j["train"] = {{"n_iter", cfg.train.n_iter},
                {"k", cfg.train.k},
                {"epsilon", optional_json(cfg.train.epsilon)},
                {"n_measures", cfg.train.n_measures},
                {"depth", cfg.train.depth},
                {"learning_rate", optional_json(cfg.train.learning_rate)},
                {"bound", cfg.train.bound},
                {"seed", cfg.train.seed},
                {"online_iters", cfg.train.online_iters},
                {"hidden_widths", cfg.train.hidden_widths},
                {"optimizer", to_string(cfg.train.optimizer)}};
  j["backtest"] = {{"baselines", cfg.baselines},
                   {"units", cfg.baseline_units},
                   {"n_seeds", cfg.n_seeds},
                   {"workers", cfg.workers}};
  j["sweep"] = {{"epsilon", cfg.sweep_epsilon},
                {"bounds_width", cfg.sweep_bounds_width},
                {"n_seeds", cfg.sweep_seeds}};
  j["output"] = {{"dir", cfg.output_dir.string()}};
  return j;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq)
    throw InputError("override must look like section.key=value: " + assignment);
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  if (!j.contains(section)) j[section] = json::object();
  j[section][key] = std::move(value);
}

std::string model_hash(const RunConfig& cfg) {
  json j = config_json(cfg);
  j["data"].erase("train");
  j["data"].erase("test");
  j.erase("backtest");
  j.erase("sweep");
  j.erase("output");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace robarb
