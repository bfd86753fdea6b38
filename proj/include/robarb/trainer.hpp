#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "robarb/costs.hpp"
#include "robarb/market_data.hpp"
#include "robarb/objective.hpp"
#include "robarb/partition.hpp"
#include "robarb/strategy_net.hpp"

namespace robarb {

// Training precision. The network code is scalar-generic; single precision
// halves the cost of the dense layers, profits are accumulated in double.
using Real = float;
using StrategyNet = StrategyNetwork<Real>;

enum class OptimizerKind { kGradientDescent, kAdam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

struct TrainConfig {
  int n_iter = 100;
  double k = 1.0;
  std::optional<double> epsilon;        // default d; 0 selects the unperturbed measure only
  int n_measures = 5;
  int depth = 12;
  std::optional<double> learning_rate;  // default 1e-3 for d <= 2, else 1e-4
  double bound = 10.0;
  std::uint64_t seed = 0;
  int online_iters = 5;
  std::vector<int> hidden_widths;       // default 32d, 64d, 128d
  OptimizerKind optimizer = OptimizerKind::kAdam;

  double resolved_epsilon(int assets) const { return epsilon.value_or(static_cast<double>(assets)); }
  double resolved_learning_rate(int assets) const {
    return learning_rate.value_or(assets <= 2 ? 1e-3 : 1e-4);
  }
  void validate() const;
};

struct TrainingLogRow {
  int iter = 0;
  double loss = 0.0;
  double cash = 0.0;
  double penalty = 0.0;
};

struct TrainResult {
  StrategyNet net;
  std::vector<TrainingLogRow> log;
  BoxPartition partition;
};

// Gradient-descent or Adam update over the flattened parameter vector,
// followed by projection of c and delta0 onto [-B, B].
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), rate_(learning_rate) {}

  void step(StrategyNet& net, const GradientBundle<Real>& gradient);

 private:
  OptimizerKind kind_;
  double rate_;
  VectorX<Real> first_;
  VectorX<Real> second_;
  long steps_ = 0;
};

// Fresh strategy from the "init" stream of cfg.seed.
StrategyNet initial_strategy(const TrainConfig& cfg, int assets, int horizon);

// Training loop: partition sampled once from the "partition" stream; each
// iteration draws a new ambiguity set from the "perturbation" stream, takes
// one full-batch gradient step and projects onto the budget box.
TrainResult train(const PathMatrix& data, const AssetBounds& bounds, const TrainConfig& cfg,
                  const CostSpec& costs);

// Continues from `net` for cfg.online_iters iterations on `augmented`. The
// price box is the hull of `bounds` and the augmented data's own bounds; the
// partition and noise come from streams indexed by `round`.
StrategyNet fine_tune_online(StrategyNet net, const PathMatrix& augmented, const AssetBounds& bounds,
                             const TrainConfig& cfg, const CostSpec& costs, std::uint64_t round,
                             std::vector<TrainingLogRow>* log = nullptr);

void write_training_log(std::ostream& out, const std::vector<TrainingLogRow>& log);

}  // namespace robarb
