#pragma once

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "robarb/backtest.hpp"
#include "robarb/config.hpp"

namespace robarb {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInput = 2,
  kExitCompatibility = 3,
  kExitNumerical = 4,
};

// Maps an exception raised by a command to its exit code.
int exit_code_for(const std::exception_ptr& error);

// Precedence: explicit flag, then the ROBARB_OUTPUT_DIR environment
// variable, then output.dir from the config.
std::filesystem::path resolve_output_dir(const RunConfig& cfg,
                                         const std::optional<std::filesystem::path>& flag);

enum class SweepAxis { kEpsilon, kBoundsWidth };
SweepAxis sweep_axis_from_string(const std::string& name);

// Train and test series plus the experiment they define.
Experiment make_experiment(const RunConfig& cfg);

// Each command writes into `out` (created if needed) and reports progress
// on `log`. Timestamps go to <command>.metadata.json only.
void cmd_ingest(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_train(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_backtest(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                  const std::filesystem::path& out, std::ostream& log);
void cmd_online_backtest(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                         const std::filesystem::path& out, std::ostream& log);
void cmd_sweep(const RunConfig& cfg, SweepAxis axis, const std::filesystem::path& out, std::ostream& log);
void cmd_report(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

}  // namespace robarb
