#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robarb/costs.hpp"
#include "robarb/trainer.hpp"

namespace robarb {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kOutputDirEnv = "ROBARB_OUTPUT_DIR";

// Everything a command needs. Relative data paths resolve against the
// directory of the config file.
struct RunConfig {
  // data
  std::filesystem::path train_csv;
  std::filesystem::path test_csv;
  std::vector<std::string> tickers;
  int horizon = 9;
  double spot = 100.0;
  std::optional<double> delta;  // default: the resolved epsilon
  double bounds_width = 1.0;

  CostSpec costs = CostSpec::per_share();
  TrainConfig train;

  // backtest
  bool baselines = true;
  double baseline_units = 10.0;
  int n_seeds = 1;
  int workers = 1;

  // sweep
  std::vector<double> sweep_epsilon;
  std::vector<double> sweep_bounds_width;
  int sweep_seeds = 5;

  std::filesystem::path output_dir = "robarb-out";

  void validate() const;
};

// Parses the JSON config; unknown keys are rejected so typos surface.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);

// Resolved configuration with every default filled in.
nlohmann::json config_json(const RunConfig& cfg);

// Applies "section.key=value" overrides; the value is parsed as JSON and
// falls back to a plain string.
void apply_override(nlohmann::json& j, const std::string& assignment);

// FNV-1a over the parts of the configuration that shape the trained
// parameters (data paths excluded), as 16 hex digits.
std::string model_hash(const RunConfig& cfg);

}  // namespace robarb
