#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "esm/bidding.hpp"
#include "esm/metrics.hpp"

namespace esm {

// Reference three-prosumer market used across tests and docs.
MarketInstance builtin_three_prosumer();

// One prosumer with coefficients drawn uniformly from the documented ranges:
// a1 in [0.01, 0.02], a2 in [0.02, 0.08], b1 in [-0.01, -0.005],
// b2 in [0, 1], p_max in [20, 40], d_min in [5, 10], d_max in [15, 30],
// p_min = 0. Consumes a fixed number of draws in a fixed order.
Prosumer draw_prosumer(std::mt19937_64& gen, int id);

MarketInstance random_instance(int I, double a, std::uint64_t seed);

// Same ranges, but each prosumer is redrawn (bounded retries, shared stream)
// until its standalone cost is strictly negative, so the analytic efficiency
// bound applies. Throws AssumptionViolation when retries are exhausted.
MarketInstance random_instance_profitable(int I, double a, std::uint64_t seed,
                                          int max_tries = 1000);

enum class Regime { centralized, sharing };

// Tabular experiment output: a tag, column names, and numeric rows.
struct ScenarioReport {
  std::string tag;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Scale grid for misreporting: 0.80, 0.81, ..., 1.20.
std::vector<double> misreport_scale_grid();

// Utility of every prosumer when `target` submits curves scaled by each
// factor while everyone else stays truthful. Sharing regime: the others'
// bids stay fixed at the truthful equilibrium and the target best-responds
// to them. Centralized regime: the operator re-solves the social program
// with the scaled curves. Realized utilities are always evaluated with true
// curves. Columns: scale, u_1..u_I (negated costs), total.
ScenarioReport misreport_sweep(const MarketInstance& instance, int target,
                               Regime regime,
                               const std::vector<double>& scales = misreport_scale_grid());

// Efficiency ratio and its analytic bound across market sizes; one row per
// (seed, I) with profitable random instances. Columns: seed, I, poa, bound.
ScenarioReport poa_vs_size(const std::vector<int>& sizes, double a, int n_seeds);

// Mean, variance, and minimum of the relative sharing saving across draws of
// I prosumers built from k distinct profitable types (I divisible by k,
// otherwise ParameterError). Columns: k, draws, mean, variance, min.
ScenarioReport diversity_experiment(int I, const std::vector<int>& type_counts,
                                    int n_draws, double a, std::uint64_t seed = 97);

// Asynchronous bidding outcomes across maximum delays and seeds.
// Columns: delay, seed, converged, iterations, lambda.
ScenarioReport delay_experiment(const MarketInstance& instance,
                                const BiddingConfig& base,
                                const std::vector<int>& delays, int n_seeds = 20);

// Bidding behavior as the price sensitivity varies.
// Columns: a, converged, iterations, lambda, a_min.
ScenarioReport sensitivity_experiment(const MarketInstance& instance,
                                      const std::vector<double>& a_values,
                                      const BiddingConfig& config);

}  // namespace esm
