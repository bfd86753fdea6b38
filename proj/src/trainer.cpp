#include "robarb/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace robarb {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd" || name == "gd") return OptimizerKind::kGradientDescent;
  throw InputError("unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
  if (n_iter < 0) throw InputError("n_iter must be nonnegative");
  if (online_iters < 0) throw InputError("online_iters must be nonnegative");
  if (n_measures < 1) throw InputError("n_measures must be at least 1");
  if (depth < 0 || depth > kMaxPartitionDepth) throw InputError("depth must be in [0, 63]");
  if (!(k >= 0.0)) throw InputError("k must be nonnegative");
  if (!(bound > 0.0)) throw InputError("bound B must be positive");
  if (epsilon && !(*epsilon >= 0.0)) throw InputError("epsilon must be nonnegative");
  if (learning_rate && !(*learning_rate > 0.0)) throw InputError("learning rate must be positive");
}

void Optimizer::step(StrategyNet& net, const GradientBundle<Real>& gradient) {
  VectorX<Real> theta = flatten_parameters(net);
  const VectorX<Real> g = flatten_gradient(gradient);
  if (!g.allFinite()) throw NumericalError("non-finite gradient");
  if (kind_ == OptimizerKind::kGradientDescent) {
    theta -= Real(rate_) * g;
  } else {
    constexpr Real beta1 = 0.9f;
    constexpr Real beta2 = 0.999f;
    constexpr Real eps = 1e-8f;
    if (first_.size() != g.size()) {
      first_ = VectorX<Real>::Zero(g.size());
      second_ = VectorX<Real>::Zero(g.size());
      steps_ = 0;
    }
    ++steps_;
    first_ = beta1 * first_ + (Real(1) - beta1) * g;
    second_ = beta2 * second_ + (Real(1) - beta2) * g.cwiseAbs2();
    const auto c1 = static_cast<Real>(1.0 - std::pow(double(beta1), static_cast<double>(steps_)));
    const auto c2 = static_cast<Real>(1.0 - std::pow(double(beta2), static_cast<double>(steps_)));
    theta.array() -= Real(rate_) * (first_.array() / c1) / ((second_.array() / c2).sqrt() + eps);
  }
  assign_parameters(net, theta);
  project_to_budget(net);
}

StrategyNet initial_strategy(const TrainConfig& cfg, int assets, int horizon) {
  auto rng = Rng::stream(cfg.seed, "init");
  return init_strategy<Real>(rng, assets, horizon, static_cast<Real>(cfg.bound), cfg.hidden_widths);
}

namespace {

void check_inside(const PathMatrix& data, const AssetBounds& bounds) {
  if (bounds.assets() != data.assets) throw InputError("bounds and data disagree on assets");
  for (int i = 0; i < data.horizon; ++i) {
    const auto block = data.values.middleRows(static_cast<Eigen::Index>(i) * data.assets, data.assets);
    if ((block.colwise() - bounds.lower).minCoeff() < 0.0 ||
        (-(block.colwise() - bounds.upper)).minCoeff() < 0.0)
      throw OutOfBoundsError("training paths leave the price box");
  }
}

void run_iterations(StrategyNet& net, Optimizer& optimizer, const PathMatrix& data,
                    const BoxPartition& partition, const TrainConfig& cfg, const CostSpec& costs,
                    Rng& noise, int iterations, int first_iter, std::vector<TrainingLogRow>* log) {
  const double epsilon = cfg.resolved_epsilon(data.assets);
  ObjectiveConfig<Real> objective;
  objective.k = static_cast<Real>(cfg.k);
  objective.partition = &partition;

  for (int it = 0; it < iterations; ++it) {
    std::vector<ScenarioSet> ambiguity;
    if (epsilon > 0.0) {
      ambiguity = build_ambiguity_set(noise, data, epsilon, cfg.n_measures);
    } else {
      ambiguity.push_back(empirical_measure(data));
    }
    GradientBundle<Real> gradient;
    const auto value = penalized_loss<Real>(net, ambiguity, objective, costs, NormMode::kBatch, &gradient);
    for (const auto& m : ambiguity) update_running_stats(net, m.paths);
    if (log) log->push_back({first_iter + it, value.loss, value.cash, value.penalty});
    optimizer.step(net, gradient);
  }
}

}  // namespace

TrainResult train(const PathMatrix& data, const AssetBounds& bounds, const TrainConfig& cfg,
                  const CostSpec& costs) {
  cfg.validate();
  costs.validate();
  check_inside(data, bounds);

  TrainResult result;
  result.net = initial_strategy(cfg, data.assets, data.horizon);
  auto partition_rng = Rng::stream(cfg.seed, "partition");
  result.partition = sample_boxes(partition_rng, bounds, cfg.depth);
  auto noise = Rng::stream(cfg.seed, "perturbation");
  Optimizer optimizer(cfg.optimizer, cfg.resolved_learning_rate(data.assets));
  run_iterations(result.net, optimizer, data, result.partition, cfg, costs, noise, cfg.n_iter, 1,
                 &result.log);
  return result;
}

StrategyNet fine_tune_online(StrategyNet net, const PathMatrix& augmented, const AssetBounds& bounds,
                             const TrainConfig& cfg, const CostSpec& costs, std::uint64_t round,
                             std::vector<TrainingLogRow>* log) {
  cfg.validate();
  if (cfg.online_iters == 0) return net;
  if (augmented.assets != net.assets || augmented.horizon != net.horizon)
    throw CompatibilityError("augmented data does not match the strategy shape");
  const AssetBounds box = hull(bounds, compute_bounds(augmented, bounds.delta));
  auto partition_rng = Rng::stream(cfg.seed, "online-partition", round);
  const BoxPartition partition = sample_boxes(partition_rng, box, cfg.depth);
  auto noise = Rng::stream(cfg.seed, "online-perturbation", round);
  Optimizer optimizer(cfg.optimizer, cfg.resolved_learning_rate(net.assets));
  run_iterations(net, optimizer, augmented, partition, cfg, costs, noise, cfg.online_iters, 1, log);
  return net;
}

void write_training_log(std::ostream& out, const std::vector<TrainingLogRow>& log) {
  out << "iter,loss,c,penalty\n";
  char buf[128];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", row.iter, row.loss, row.cash, row.penalty);
    out << buf;
  }
}

}  // namespace robarb
