#include "robarb/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "robarb/errors.hpp"
#include "robarb/rng.hpp"

namespace robarb {

PriceSeries generate_pair(const PairModel& model, Eigen::Index rows, std::uint64_t seed) {
  if (rows < 1) throw InputError("synthetic series needs at least one row");
  if (!(model.start1 > 0.0 && model.start2 > 0.0)) throw InputError("start prices must be positive");
  if (!(model.kappa >= 0.0 && model.kappa <= 2.0)) throw InputError("kappa must lie in [0, 2]");
  if (!(model.spread_vol >= 0.0 && model.common_vol >= 0.0)) throw InputError("volatilities must be nonnegative");

  auto rng = Rng::stream(seed, "synthetic");
  PriceSeries out;
  out.tickers = {"A", "B"};
  out.prices.resize(rows, 2);
  out.dates.reserve(static_cast<std::size_t>(rows));
  double x = 0.0;
  double s = 0.0;
  char buf[32];
  for (Eigen::Index t = 0; t < rows; ++t) {
    out.prices(t, 0) = model.start1 * std::exp(x + 0.5 * s);
    out.prices(t, 1) = model.start2 * std::exp(x - 0.5 * s);
    std::snprintf(buf, sizeof buf, "d%06lld", static_cast<long long>(t));
    out.dates.emplace_back(buf);
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    x += model.common_vol * z1;
    s = (1.0 - model.kappa) * s + model.spread_vol * z2;
  }
  return out;
}

}  // namespace robarb
