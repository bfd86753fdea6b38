// End-to-end runs of the robarb executable.

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "robarb/market_data.hpp"
#include "robarb/synthetic.hpp"
#include "test_util.hpp"

namespace robarb {
namespace {

namespace fs = std::filesystem;
using robarb::testing::read_text;
using robarb::testing::TempDir;
using robarb::testing::write_text;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto train = generate_pair(PairModel{}, 150, 1);
    auto test = generate_pair(PairModel{}, 40, 2);
    for (auto& d : test.dates) d = "z" + d;
    std::ofstream a(dir_ / "train.csv"), b(dir_ / "test.csv");
    write_series_csv(a, train);
    write_series_csv(b, test);
    a.close();
    b.close();
    write_config(R"({
      "schema_version": 1,
      "data": {"train": "train.csv", "test": "test.csv", "tickers": ["A", "B"], "horizon": 3},
      "train": {"n_iter": 3, "hidden_widths": [4, 4], "depth": 4, "n_measures": 2, "online_iters": 2},
      "backtest": {"n_seeds": 2},
      "sweep": {"epsilon": [0, 1, 2], "bounds_width": [1, 2], "n_seeds": 2},
      "output": {"dir": "out"}
    })");
  }

  void write_config(const std::string& text) { write_text(dir_ / "config.json", text); }

  // Runs `robarb <args>` inside the scratch directory and returns its exit
  // status; stderr goes to err.txt.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = "cd '" + dir_.path().string() + "' && " + env + " '" + std::string(ROBARB_CLI) +
                            "' " + args + " -c config.json -q 2> err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string err() const { return read_text(dir_ / "err.txt"); }
  fs::path out() const { return dir_ / "out"; }

  TempDir dir_;
};

TEST_F(Cli, TrainWritesArtifacts) {
  ASSERT_EQ(run("train"), 0) << err();
  for (const char* f : {"checkpoint.json", "training_log.csv", "config.json", "train.metadata.json"})
    EXPECT_TRUE(fs::exists(out() / f)) << f;
  const auto log = read_text(out() / "training_log.csv");
  EXPECT_EQ(log.substr(0, log.find('\n')), "# robarb training_log schema 1");
  const auto echo = nlohmann::json::parse(read_text(out() / "config.json"));
  EXPECT_EQ(echo.at("schema_version"), 1);
  EXPECT_EQ(echo.at("train").at("seed"), 0);
  EXPECT_EQ(nlohmann::json::parse(read_text(out() / "checkpoint.json")).at("schema"), "robarb.checkpoint/1");
}

TEST_F(Cli, TrainIsDeterministic) {
  ASSERT_EQ(run("train -o first"), 0) << err();
  ASSERT_EQ(run("train -o second"), 0) << err();
  for (const char* f : {"training_log.csv", "checkpoint.json", "config.json"})
    EXPECT_EQ(read_text(dir_ / "first" / f), read_text(dir_ / "second" / f)) << f;
  ASSERT_EQ(run("train -o third --seed 5"), 0) << err();
  EXPECT_NE(read_text(dir_ / "first/checkpoint.json"), read_text(dir_ / "third/checkpoint.json"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("train --set data.train=missing.csv"), 2);
  EXPECT_NE(err().find("data not found"), std::string::npos) << err();
  EXPECT_EQ(run("train --set train.n_iters=4"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("sweep"), 2);  // --axis is required
  EXPECT_EQ(run("sweep --axis volume"), 2);
  EXPECT_EQ(run("backtest --checkpoint nowhere.json"), 2);

  ASSERT_EQ(run("train"), 0) << err();
  EXPECT_EQ(run("backtest --set data.horizon=4"), 3);
  EXPECT_EQ(run("backtest --set train.bound=5"), 3);
  // Perturbation radius far beyond the padded price box.
  EXPECT_EQ(run("train -o oob --set train.epsilon=50 --set data.delta=0.01"), 4);
}

TEST_F(Cli, BacktestTables) {
  ASSERT_EQ(run("train"), 0) << err();
  ASSERT_EQ(run("backtest"), 0) << err();
  std::istringstream csv(read_text(out() / "metrics.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "# robarb metrics schema 1");
  std::getline(csv, line);
  EXPECT_EQ(line, "metric,strategy,buy_and_hold,one_time_buy_and_hold");
  std::vector<std::string> labels;
  while (std::getline(csv, line)) labels.push_back(line.substr(0, line.find("\",") + 1));
  EXPECT_EQ(labels, (std::vector<std::string>{"\"Overall Profit\"", "\"Average Profit\"", "\"% of Profitable Trades\"",
                                              "\"Max. Profit\"", "\"Min. Profit\"", "\"Sharpe Ratio\"",
                                              "\"Sortino Ratio\""}));
  const auto j = nlohmann::json::parse(read_text(out() / "metrics.json"));
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_TRUE(j.at("columns").contains("buy_and_hold"));
  EXPECT_TRUE(fs::exists(out() / "windows.csv"));
  EXPECT_TRUE(fs::exists(out() / "equity.csv"));
}

TEST_F(Cli, OnlineWithZeroItersMatchesBacktest) {
  ASSERT_EQ(run("train"), 0) << err();
  ASSERT_EQ(run("backtest"), 0) << err();
  ASSERT_EQ(run("online-backtest --set train.online_iters=0"), 0) << err();
  for (const char* f : {"metrics.csv", "metrics.json", "windows.csv", "equity.csv"})
    EXPECT_EQ(read_text(out() / f), read_text(out() / (std::string("online_") + f))) << f;
}

TEST_F(Cli, OnlineLogsItersPerWindow) {
  ASSERT_EQ(run("train"), 0) << err();
  ASSERT_EQ(run("online-backtest"), 0) << err();
  std::istringstream log(read_text(out() / "online_training_log.csv"));
  std::string line;
  int rows = -2;  // schema and column header
  while (std::getline(log, line)) ++rows;
  EXPECT_EQ(rows, 2 * 13);
}

TEST_F(Cli, OutputDirPrecedence) {
  const auto env_dir = dir_ / "from-env";
  ASSERT_EQ(run("ingest", "ROBARB_OUTPUT_DIR='" + env_dir.string() + "'"), 0) << err();
  EXPECT_TRUE(fs::exists(env_dir / "ingest.json"));
  EXPECT_FALSE(fs::exists(out()));
  ASSERT_EQ(run("ingest -o flag", "ROBARB_OUTPUT_DIR='" + env_dir.string() + "'"), 0) << err();
  EXPECT_TRUE(fs::exists(dir_ / "flag" / "ingest.json"));
  ASSERT_EQ(run("ingest"), 0) << err();
  const auto ingest = nlohmann::json::parse(read_text(out() / "ingest.json"));
  EXPECT_EQ(ingest.at("schema_version"), 1);
  EXPECT_TRUE(fs::exists(out() / "train_clean.csv"));
}

TEST_F(Cli, SweepRowsPerValueAndSeed) {
  ASSERT_EQ(run("sweep --axis epsilon"), 0) << err();
  std::istringstream csv(read_text(out() / "sweep_epsilon.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "# robarb sweep schema 1");
  std::getline(csv, line);
  EXPECT_EQ(line.substr(0, 17), "axis,value,seed,o");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 3 * 2);
  ASSERT_EQ(run("sweep --axis bounds_width"), 0) << err();
  EXPECT_TRUE(fs::exists(out() / "sweep_bounds_width.csv"));
}

TEST_F(Cli, ReportWritesReplicasAndIsReproducible) {
  ASSERT_EQ(run("report -o r1"), 0) << err();
  ASSERT_EQ(run("report -o r2 -j 2"), 0) << err();
  for (const char* f : {"report_metrics.csv", "report_equity.csv", "report_replicas.csv", "replicas/seed_1.json"})
    EXPECT_EQ(read_text(dir_ / "r1" / f), read_text(dir_ / "r2" / f)) << f;
  EXPECT_NE(read_text(dir_ / "r1/replicas/seed_0.json"), read_text(dir_ / "r1/replicas/seed_1.json"));
}

}  // namespace
}  // namespace robarb
