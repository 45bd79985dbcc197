#pragma once

#include "esm/equilibrium.hpp"

namespace esm {

// Sharing cost of prosumer i at a bid-backed profile:
// Gamma_i = f(p_i) - u(d_i) + lambda(b) q_i with q_i = -a lambda(b) + b_i,
// where lambda(b) is recomputed from the bids.
double sharing_payoff(const MarketInstance& instance, const EquilibriumSolution& solution,
                      int i);

// All sharing costs. Throws ParameterError when the solution carries no bids
// and no clearing price semantics (self-sufficiency profiles).
Eigen::VectorXd sharing_payoffs(const MarketInstance& instance,
                                const EquilibriumSolution& solution);

// Aggregate payment imbalance sum_i lambda (d_i - p_i); zero when the market
// clears exactly.
double budget_balance_gap(const MarketInstance& instance,
                          const EquilibriumSolution& solution);

// Ratio of total sharing cost to total social cost, both negative in
// profitable instances. Throws ParameterError when the social cost is zero.
double price_of_anarchy(const MarketInstance& instance, const EquilibriumSolution& gne,
                        const EquilibriumSolution& social);

struct ParetoCheck {
  bool pass = true;        // no prosumer worse off than standalone (within tol)
  bool any_strict = false; // someone strictly better off
  bool coincide = false;   // sharing profile equals standalone profile
  Eigen::VectorXd gamma;
  Eigen::VectorXd j_self;
};

ParetoCheck pareto_check(const MarketInstance& instance, const EquilibriumSolution& gne,
                         double tol = 1e-6);

struct PoaBound {
  double c1 = 0;
  double c2 = 0;
  double c = 0;
  double bound = 0;
};

// Analytic lower bound on the efficiency ratio:
//   C1 = max_i max((p_min - d_max)^2, (p_max - d_min)^2)
//   C2 = max_i J_i(self)   (must be < 0 for every prosumer)
//   bound = 1 - C1 / (a |C2| (I - 1)).
// Throws AssumptionViolation when some standalone cost is >= 0.
PoaBound poa_lower_bound(const MarketInstance& instance,
                         const EquilibriumSolution& self_profile);

// Bound on max_i |p_gne_i - p_social_i| (and the same for d):
// 2 * gamma * sigma / (I - 1), with gamma the largest response slope and
// sigma the population imbalance range divided by a.
double gne_social_deviation_bound(const MarketInstance& instance);

struct OutcomeReport {
  Eigen::VectorXd j_gne;     // net costs at the sharing equilibrium
  Eigen::VectorXd gamma;     // sharing payoffs (net cost plus payment)
  Eigen::VectorXd payment;   // lambda * q_i
  double total_social = 0;
  double total_gne = 0;
  double poa = 0;
  double poa_abs_gap = 0;    // total_gne - total_social
  double poa_bound = 0;      // NaN when some standalone cost is nonnegative
  double price_gap = 0;      // |zeta - lambda_social|
  double budget_gap = 0;
  bool pareto_pass = false;
  bool pareto_any_strict = false;
};

OutcomeReport make_outcome_report(const MarketInstance& instance,
                                  const EquilibriumSolution& gne,
                                  const EquilibriumSolution& social,
                                  const EquilibriumSolution& self_profile);

}  // namespace esm
