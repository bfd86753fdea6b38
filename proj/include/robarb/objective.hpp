#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "robarb/costs.hpp"
#include "robarb/measures.hpp"
#include "robarb/partition.hpp"
#include "robarb/strategy_net.hpp"

namespace robarb {

// beta(x) = lambda * max(x, 0)^p.
template <typename Scalar>
struct PenaltyFn {
  Scalar lambda = Scalar(1);
  Scalar power = Scalar(2);

  Scalar operator()(Scalar x) const {
    using std::pow;
    return x > Scalar(0) ? lambda * pow(x, power) : Scalar(0);
  }
  Scalar derivative(Scalar x) const {
    using std::pow;
    return x > Scalar(0) ? lambda * power * pow(x, power - Scalar(1)) : Scalar(0);
  }
};

// Payoff Phi evaluated on a flattened (n*d) path column.
using PathPayoff = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

template <typename Scalar>
struct ObjectiveConfig {
  Scalar k = Scalar(1);
  PenaltyFn<Scalar> penalty;
  const BoxPartition* partition = nullptr;
  PathPayoff payoff;  // empty means Phi = 0
};

// Mean of `values` within each cell id; empty cells get 0.
template <typename Scalar>
VectorX<Scalar> conditional_cell_means(const std::type_identity_t<Eigen::Ref<const VectorX<Scalar>>>& values,
                                       std::span<const std::uint64_t> cell_ids,
                                       std::uint64_t n_cells) {
  if (static_cast<Eigen::Index>(cell_ids.size()) != values.size())
    throw InputError("one cell id per value required");
  VectorX<Scalar> sums = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(n_cells));
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(n_cells));
  for (std::size_t l = 0; l < cell_ids.size(); ++l) {
    if (cell_ids[l] >= n_cells) throw InputError("cell id out of range");
    const auto b = static_cast<Eigen::Index>(cell_ids[l]);
    sums[b] += values[static_cast<Eigen::Index>(l)];
    ++counts[b];
  }
  for (Eigen::Index b = 0; b < sums.size(); ++b)
    if (counts[b] > 0) sums[b] /= Scalar(counts[b]);
  return sums;
}

// Maps observed cell indices to 0..K-1 in increasing index order.
inline std::vector<std::uint64_t> compact_cells(std::span<const std::uint64_t> ids,
                                                std::uint64_t* n_cells) {
  std::vector<std::uint64_t> unique(ids.begin(), ids.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<std::uint64_t> out(ids.size());
  for (std::size_t l = 0; l < ids.size(); ++l)
    out[l] = static_cast<std::uint64_t>(std::lower_bound(unique.begin(), unique.end(), ids[l]) -
                                        unique.begin());
  *n_cells = unique.size();
  return out;
}

template <typename Scalar>
struct LossEvaluation {
  Scalar loss = Scalar(0);
  Scalar penalty = Scalar(0);  // sum over measures, before multiplying by k
  Scalar cash = Scalar(0);
};

// Penalized super-replication objective
//   c + k * sum_m (1/M) sum_i beta( E_m[Phi - h | cell of path i] )
// over the scenario sets of the ambiguity set. With `gradient` non-null the
// exact gradient with respect to every trainable parameter is written there.
template <typename Scalar>
LossEvaluation<Scalar> penalized_loss(const StrategyNetwork<Scalar>& net,
                                      std::span<const ScenarioSet> ambiguity,
                                      const ObjectiveConfig<Scalar>& cfg, const CostSpec& costs,
                                      NormMode mode = NormMode::kBatch,
                                      GradientBundle<Scalar>* gradient = nullptr) {
  if (!cfg.partition) throw InputError("objective needs a partition");
  if (ambiguity.empty()) throw InputError("ambiguity set is empty");
  const Eigen::Index count = ambiguity.front().count();

  LossEvaluation<Scalar> result;
  result.cash = net.cash;
  if (gradient) *gradient = zero_gradient(net);
  Scalar cash_grad(1);

  ForwardTape<Scalar> tape;
  MatrixX<Scalar> profit_grad;
  for (const auto& measure : ambiguity) {
    if (measure.count() != count) throw InputError("scenario sets must share the path count");
    if (count == 0) throw InputError("scenario sets must not be empty");

    const MatrixX<Scalar> pos = positions(net, measure.paths, mode, gradient ? &tape : nullptr);
    const RowVectorX<Scalar> profit =
        path_profits<Scalar>(pos, measure.paths, measure.spot, costs, gradient ? &profit_grad : nullptr);

    VectorX<Scalar> shortfall = -(profit.transpose().array() + net.cash);
    if (cfg.payoff) {
      for (Eigen::Index l = 0; l < count; ++l) {
        const double phi = cfg.payoff(measure.paths.col(l));
        if (!(std::abs(phi) <= static_cast<double>(net.bound)))
          throw InputError("payoff exceeds the budget bound B");
        shortfall[l] += Scalar(phi);
      }
    }

    const auto raw_ids = cell_indices(*cfg.partition, measure.terminal());
    std::uint64_t n_cells = 0;
    const auto ids = compact_cells(raw_ids, &n_cells);
    const VectorX<Scalar> means = conditional_cell_means<Scalar>(shortfall, ids, n_cells);

    Scalar penalty(0);
    RowVectorX<Scalar> d_profit(count);
    const Scalar inv_count = Scalar(1) / Scalar(count);
    for (Eigen::Index l = 0; l < count; ++l) {
      const Scalar g = means[static_cast<Eigen::Index>(ids[static_cast<std::size_t>(l)])];
      penalty += cfg.penalty(g);
      // Each path's own-cell term contributes beta'(g_b) * (count_b / M) * (-1 / count_b).
      d_profit[l] = -cfg.k * cfg.penalty.derivative(g) * inv_count;
    }
    penalty *= inv_count;
    result.penalty += penalty;

    if (gradient) {
      cash_grad += d_profit.sum();
      const MatrixX<Scalar> pos_grad = profit_grad.array().rowwise() * d_profit.array();
      accumulate(*gradient, backward(net, tape, pos_grad, Scalar(0)));
    }
  }
  result.loss = net.cash + cfg.k * result.penalty;
  if (gradient) gradient->cash = cash_grad;
  if (!std::isfinite(static_cast<double>(result.loss))) throw NumericalError("objective is not finite");
  return result;
}

// Super-replication price estimate: the trained cash parameter. Negative
// values with vanishing residual penalty indicate a robust statistical
// arbitrage.
template <typename Scalar>
Scalar estimate_gamma(const StrategyNetwork<Scalar>& trained) {
  return trained.cash;
}

}  // namespace robarb
