#pragma once

#include <cstdint>

#include "robarb/market_data.hpp"

namespace robarb {

// Cointegrated pair with a mean-reverting log spread:
//   log S1 = log(start1) + x + s / 2,  log S2 = log(start2) + x - s / 2
//   x_{t+1} = x_t + common_vol * z1
//   s_{t+1} = (1 - kappa) * s_t + spread_vol * z2
struct PairModel {
  double start1 = 100.0;
  double start2 = 80.0;
  double kappa = 0.3;
  double spread_vol = 0.02;
  double common_vol = 0.005;
};

// `rows` daily prices with dates d000000, d000001, ...; tickers A and B.
// Noise comes from the "synthetic" stream of `seed`.
PriceSeries generate_pair(const PairModel& model, Eigen::Index rows, std::uint64_t seed);

}  // namespace robarb
