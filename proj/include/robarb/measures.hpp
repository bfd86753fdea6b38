#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "robarb/market_data.hpp"
#include "robarb/rng.hpp"

namespace robarb {

enum class MeasureKind { kEmpirical, kPerturbed };

// Equally weighted scenario paths, same layout as PathMatrix::values.
struct ScenarioSet {
  Eigen::MatrixXd paths;
  Eigen::VectorXd spot;
  int horizon = 0;
  int assets = 0;
  MeasureKind kind = MeasureKind::kEmpirical;
  int index = 0;  // m for perturbed measures

  Eigen::Index count() const { return paths.cols(); }
  auto terminal() const { return paths.bottomRows(assets); }
};

ScenarioSet empirical_measure(const PathMatrix& base);

// One draw of block perturbation noise. Column l of `tau` is the flattened n*d block
// for path l, already rescaled to Euclidean norm u_eps.
struct Perturbation {
  Eigen::MatrixXd tau;
  double epsilon = 0.0;
  double u_eps = 0.0;
};

// Draw order: the n*d standard normals of path 0 (step-major), then path 1,
// ..., then U_eps. A block with zero norm is redrawn once; a second zero norm
// throws NumericalError.
Perturbation sample_perturbation(Rng& rng, double epsilon, Eigen::Index paths, int horizon,
                                 int assets);

ScenarioSet perturb(const PathMatrix& base, const Perturbation& p, int index = 0);

// Mean block displacement between corresponding paths: the transport cost of
// the diagonal coupling, which bounds W1(base, perturbed) from above.
double coupling_cost(const PathMatrix& base, const ScenarioSet& perturbed);

std::vector<ScenarioSet> build_ambiguity_set(Rng& rng, const PathMatrix& base, double epsilon,
                                             int n_measures);

// Long format: measure,path,step,asset,value (path-major, then step, then
// asset). Step 0 rows carry the spot.
void write_scenarios_csv(std::ostream& out, std::span<const ScenarioSet> sets);

}  // namespace robarb
