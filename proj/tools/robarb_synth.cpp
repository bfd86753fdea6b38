// Writes a synthetic mean-reverting pair as train/test CSV files.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "robarb/errors.hpp"
#include "robarb/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic cointegrated pair generator"};
  robarb::PairModel model;
  long train_rows = 2000;
  long test_rows = 300;
  std::uint64_t seed = 0;
  std::string train_out = "train.csv";
  std::string test_out = "test.csv";
  app.add_option("--train-rows", train_rows, "Rows of the training file")->capture_default_str();
  app.add_option("--test-rows", test_rows, "Rows of the test file")->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  app.add_option("--kappa", model.kappa, "Spread mean-reversion speed per day")->capture_default_str();
  app.add_option("--spread-vol", model.spread_vol, "Daily log-spread volatility")->capture_default_str();
  app.add_option("--common-vol", model.common_vol, "Daily common-factor volatility")->capture_default_str();
  app.add_option("--train-out", train_out, "Training CSV path")->capture_default_str();
  app.add_option("--test-out", test_out, "Test CSV path")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    if (train_rows < 2 || test_rows < 2) throw robarb::InputError("need at least 2 rows per file");
    const auto all = robarb::generate_pair(model, train_rows + test_rows, seed);
    std::ofstream train(train_out), test(test_out);
    if (!train || !test) throw robarb::InputError("cannot open output files");
    robarb::write_series_csv(train, robarb::slice(all, 0, train_rows));
    robarb::write_series_csv(test, robarb::slice(all, train_rows, test_rows));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
