// robarb: train, backtest and sweep robust statistical arbitrage strategies.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robarb/commands.hpp"
#include "robarb/errors.hpp"

namespace {

using robarb::RunConfig;
namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string output_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string checkpoint;
  std::string axis;
  bool quiet = false;
};

RunConfig resolve_config(const Options& opt) {
  std::ifstream in(opt.config);
  if (!in) throw robarb::InputError("config not found: " + opt.config);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    throw robarb::InputError("config is not valid JSON: " + opt.config);
  }
  for (const auto& o : opt.overrides) robarb::apply_override(j, o);
  if (opt.seed) j["train"]["seed"] = *opt.seed;
  if (opt.workers) j["backtest"]["workers"] = *opt.workers;
  return robarb::config_from_json(j, fs::path(opt.config).parent_path());
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("-c,--config", opt.config, "JSON run configuration")->required();
  cmd->add_option("-o,--output-dir", opt.output_dir, "Output directory (overrides $ROBARB_OUTPUT_DIR and output.dir)");
  cmd->add_option("--set", opt.overrides, "Override a config value, e.g. train.n_iter=20");
  cmd->add_option("--seed", opt.seed, "Base seed (train.seed)");
  cmd->add_option("-j,--workers", opt.workers, "Parallel replicas (backtest.workers)");
  cmd->add_flag("-q,--quiet", opt.quiet, "No progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust statistical arbitrage: training, backtesting and sweeps"};
  app.require_subcommand(1);
  Options opt;

  auto* ingest = app.add_subcommand("ingest", "Load, align and summarize the configured price files");
  auto* train = app.add_subcommand("train", "Train a strategy; writes checkpoint, training log, config echo");
  auto* backtest = app.add_subcommand("backtest", "Evaluate a checkpoint on the test series");
  auto* online = app.add_subcommand("online-backtest", "Backtest with fine-tuning before every window");
  auto* sweep = app.add_subcommand("sweep", "Train and test over an epsilon or bounds-width grid");
  auto* report = app.add_subcommand("report", "Multi-seed experiment suite with averaged metrics and equity quantiles");
  for (auto* cmd : {ingest, train, backtest, online, sweep, report}) add_common(cmd, opt);
  for (auto* cmd : {backtest, online})
    cmd->add_option("--checkpoint", opt.checkpoint, "Checkpoint (default <output-dir>/checkpoint.json)");
  sweep->add_option("--axis", opt.axis, "epsilon or bounds_width")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : robarb::kExitInput;
  }

  try {
    const RunConfig cfg = resolve_config(opt);
    const fs::path out = robarb::resolve_output_dir(
        cfg, opt.output_dir.empty() ? std::nullopt : std::optional<fs::path>(opt.output_dir));
    std::ofstream devnull;
    std::ostream& log = opt.quiet ? static_cast<std::ostream&>(devnull) : std::cerr;
    const fs::path checkpoint = opt.checkpoint.empty() ? out / "checkpoint.json" : fs::path(opt.checkpoint);

    if (*ingest) robarb::cmd_ingest(cfg, out, log);
    else if (*train) robarb::cmd_train(cfg, out, log);
    else if (*backtest) robarb::cmd_backtest(cfg, checkpoint, out, log);
    else if (*online) robarb::cmd_online_backtest(cfg, checkpoint, out, log);
    else if (*sweep) robarb::cmd_sweep(cfg, robarb::sweep_axis_from_string(opt.axis), out, log);
    else if (*report) robarb::cmd_report(cfg, out, log);
    return robarb::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return robarb::exit_code_for(std::current_exception());
  }
}
