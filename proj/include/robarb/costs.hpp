#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

#include "robarb/errors.hpp"

namespace robarb {

enum class TransactionMode { kNone, kPerShare, kProportional };

// Trading cost model. For a position change x at price S and post-trade
// position p:
//   transaction  per share: lambda_trans * |x|
//                proportional: lambda_trans * S * |x|
//   spread       0.5 * lambda_spread * |x|        (currency units, no S)
//   short        lambda_short * max(-p, 0) * S
struct CostSpec {
  TransactionMode mode = TransactionMode::kNone;
  double trans_lambda = 0.0;
  double spread_lambda = 0.0;
  double short_lambda = 0.0;  // daily

  static CostSpec zero() { return {}; }
  static CostSpec per_share(double trans = 0.01, double spread = 0.0002,
                            double borrow = 0.1 / 252.0) {
    return {TransactionMode::kPerShare, trans, spread, borrow};
  }
  static CostSpec proportional(double trans = 0.0001, double spread = 0.0002,
                               double borrow = 0.1 / 252.0) {
    return {TransactionMode::kProportional, trans, spread, borrow};
  }

  CostSpec scaled(double factor) const {
    return {mode, trans_lambda * factor, spread_lambda * factor, short_lambda * factor};
  }

  void validate() const {
    if (!(trans_lambda >= 0.0 && spread_lambda >= 0.0 && short_lambda >= 0.0))
      throw InputError("cost lambdas must be nonnegative");
  }

  // Coefficient of |x| at price S (transaction plus spread legs).
  template <typename Scalar>
  Scalar turnover_rate(Scalar price) const {
    Scalar rate = Scalar(0.5 * spread_lambda);
    if (mode == TransactionMode::kPerShare) rate += Scalar(trans_lambda);
    if (mode == TransactionMode::kProportional) rate += Scalar(trans_lambda) * price;
    return rate;
  }
};

std::string to_string(TransactionMode mode);
TransactionMode transaction_mode_from_string(const std::string& name);

template <typename Scalar>
Scalar step_cost(const CostSpec& spec, Scalar price, Scalar prev_pos, Scalar new_pos) {
  using std::abs;
  using std::max;
  const Scalar change = abs(new_pos - prev_pos);
  return spec.turnover_rate(price) * change +
         Scalar(spec.short_lambda) * max(-new_pos, Scalar(0)) * price;
}

// C_n along one path. `prices` is (n+1) x d with the spot in row 0.
// `positions` is n x d (rows 0..n-1), or (n+1) x d with a zero final row;
// the step i = n closes every position.
template <typename Scalar>
Scalar total_costs(const CostSpec& spec,
                   const std::type_identity_t<Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>>& positions,
                   const std::type_identity_t<Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>>& prices) {
  const Eigen::Index steps = prices.rows() - 1;
  if (positions.cols() != prices.cols()) throw InputError("positions and prices disagree on assets");
  if (positions.rows() == steps + 1) {
    if (!positions.row(steps).isZero(0)) throw InputError("closing position row must be zero");
  } else if (positions.rows() != steps) {
    throw InputError("positions must have n or n+1 rows for n+1 prices");
  }
  Scalar total(0);
  for (Eigen::Index j = 0; j < prices.cols(); ++j) {
    Scalar prev(0);
    for (Eigen::Index i = 0; i <= steps; ++i) {
      const Scalar next = i < steps ? positions(i, j) : Scalar(0);
      total += step_cost(spec, prices(i, j), prev, next);
      prev = next;
    }
  }
  return total;
}

}  // namespace robarb
