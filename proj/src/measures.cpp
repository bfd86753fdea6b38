#include "robarb/measures.hpp"

#include <cmath>
#include <ostream>

#include "robarb/errors.hpp"

namespace robarb {

ScenarioSet empirical_measure(const PathMatrix& base) {
  ScenarioSet s;
  s.paths = base.values;
  s.spot = base.spot;
  s.horizon = base.horizon;
  s.assets = base.assets;
  s.kind = MeasureKind::kEmpirical;
  return s;
}

Perturbation sample_perturbation(Rng& rng, double epsilon, Eigen::Index paths, int horizon,
                                 int assets) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (paths < 1 || horizon < 1 || assets < 1) throw InputError("perturbation shape must be positive");

  const Eigen::Index block = static_cast<Eigen::Index>(horizon) * assets;
  Perturbation p;
  p.epsilon = epsilon;
  p.tau.resize(block, paths);
  for (Eigen::Index l = 0; l < paths; ++l) {
    for (int attempt = 0;; ++attempt) {
      for (Eigen::Index r = 0; r < block; ++r) p.tau(r, l) = rng.normal();
      if (p.tau.col(l).norm() > 0.0) break;
      if (attempt == 1) throw NumericalError("perturbation block with zero norm after resample");
    }
  }
  p.u_eps = epsilon * rng.uniform_open();
  for (Eigen::Index l = 0; l < paths; ++l) p.tau.col(l) *= p.u_eps / p.tau.col(l).norm();
  return p;
}

ScenarioSet perturb(const PathMatrix& base, const Perturbation& p, int index) {
  if (p.tau.rows() != base.values.rows() || p.tau.cols() != base.values.cols())
    throw InputError("perturbation shape does not match paths");
  ScenarioSet s = empirical_measure(base);
  s.paths += p.tau;
  s.kind = MeasureKind::kPerturbed;
  s.index = index;
  return s;
}

double coupling_cost(const PathMatrix& base, const ScenarioSet& perturbed) {
  if (base.values.rows() != perturbed.paths.rows() || base.values.cols() != perturbed.paths.cols())
    throw InputError("coupling requires path sets of equal shape");
  if (base.count() == 0) return 0.0;
  return (perturbed.paths - base.values).colwise().norm().mean();
}

std::vector<ScenarioSet> build_ambiguity_set(Rng& rng, const PathMatrix& base, double epsilon,
                                             int n_measures) {
  if (n_measures < 1) throw InputError("n_measures must be at least 1");
  std::vector<ScenarioSet> sets;
  sets.reserve(static_cast<std::size_t>(n_measures));
  for (int m = 0; m < n_measures; ++m) {
    const auto p = sample_perturbation(rng, epsilon, base.count(), base.horizon, base.assets);
    sets.push_back(perturb(base, p, m));
    if (!(coupling_cost(base, sets.back()) < epsilon))
      throw NumericalError("generated measure is not certified inside the Wasserstein ball");
  }
  return sets;
}

void write_scenarios_csv(std::ostream& out, std::span<const ScenarioSet> sets) {
  out << "measure,path,step,asset,value\n";
  out.precision(17);
  for (std::size_t m = 0; m < sets.size(); ++m) {
    const auto& s = sets[m];
    for (Eigen::Index l = 0; l < s.count(); ++l) {
      for (int j = 0; j < s.assets; ++j) out << m << ',' << l << ",0," << j << ',' << s.spot[j] << '\n';
      for (int i = 1; i <= s.horizon; ++i)
        for (int j = 0; j < s.assets; ++j)
          out << m << ',' << l << ',' << i << ',' << j << ','
              << s.paths(static_cast<Eigen::Index>(i - 1) * s.assets + j, l) << '\n';
    }
  }
}

}  // namespace robarb
