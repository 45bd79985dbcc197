#pragma once

#include <cstdint>

#include "esm/equilibrium.hpp"

namespace esm {

// Exhaustive-search configuration for the grid oracle.
struct GridSpec {
  double step = 0.01;
  int max_points_per_axis = 4001;
};

struct GridResult {
  double p = 0;
  double d = 0;
  double objective = 0;
};

// Brute-force minimizer of one prosumer's surrogate objective at price
// lambda over a (p, d) grid covering its box. Independent of the bisection
// solvers; used to cross-check them. Throws ParameterError when either axis
// would need more than max_points_per_axis points.
GridResult grid_best_response(const Prosumer& prosumer, double lambda, double a,
                              int I, const GridSpec& grid = {});

struct PerturbationResult {
  bool pass = true;
  double worst_improvement = 0;  // largest objective decrease found
  double tol = 0;                // pass threshold actually applied
  int kept = 0;                  // candidates surviving the balance filter
};

// Stochastic optimality check: samples balanced box perturbations of radius r
// around the solution and verifies none improves the mode's objective.
// Candidates are rebalanced, clipped to the boxes, and discarded when
// clipping leaves an aggregate imbalance above r * 1e-3. The pass threshold
// credits first-order imbalance priced at the solution's dual:
// tol = 1e-6 + |dual| * r * 1e-3.
PerturbationResult perturbation_optimality_check(const MarketInstance& instance,
                                                 const EquilibriumSolution& solution,
                                                 int n_samples, double radius,
                                                 std::uint64_t seed);

}  // namespace esm
