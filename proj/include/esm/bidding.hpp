#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "esm/equilibrium.hpp"

namespace esm {

enum class BidMode { strategic, price_taker };
enum class Schedule { sync, async };

struct BiddingConfig {
  double epsilon = 1e-4;
  int max_iterations = 500;
  BidMode mode = BidMode::strategic;
  Schedule schedule = Schedule::sync;
  double miss_probability = 0.8;  // async only
  int max_delay = 3;              // async only
  std::uint64_t seed = 0;         // async miss draws
  double initial_price = 0.0;
  double subproblem_tol = kSurrogateTol;
};

enum class Termination { converged, max_iterations, diverged };

struct IterationRecord {
  int k = 0;
  double lambda_prev = 0;
  double lambda = 0;
  Eigen::VectorXd p;
  Eigen::VectorXd d;
  Eigen::VectorXd b;
  std::vector<bool> updated;
};

struct BiddingTrace {
  double initial_price = 0;
  std::vector<IterationRecord> records;
  Termination termination = Termination::converged;
  bool sensitivity_satisfied = true;  // a >= min_market_sensitivity; reported, not enforced
  double final_gap = 0;
};

// One prosumer's bid update at the current clearing price: solve the
// subproblem (surrogate when strategic, plain price response when
// price-taking) and bid b = d - p + a * lambda.
double prosumer_bid_update(const Prosumer& prosumer, double lambda, double a, int I,
                           BidMode mode, double subproblem_tol, double* p_out,
                           double* d_out);

// Platform price update from the bid vector: lambda = sum b / (a I).
double platform_clear(const Eigen::VectorXd& b, double a);

// Iterative bidding. Each iteration every prosumer either refreshes its bid
// or (async schedule) keeps the stale one, after which the platform clears.
// Async updates are skipped with miss_probability but never more than
// max_delay - 1 times in a row, and a prosumer that has never bid always
// bids. Convergence requires the price gap to stay within epsilon for
// max_delay consecutive iterations (one iteration when sync); the profile is
// then refreshed at the final price. Divergence is declared when |lambda|
// exceeds 1e6 times the price bracket width.
std::pair<EquilibriumSolution, BiddingTrace> run_bidding(const MarketInstance& instance,
                                                         const BiddingConfig& config = {});

struct ConvergenceDiagnostics {
  int iterations = 0;
  double final_gap = 0;
  std::vector<double> distances;  // |lambda_k - lambda_star| per recorded price
  bool monotone = true;           // dist_{k+1}^2 <= dist_k^2 - gap_k^2 throughout
  double worst_violation = 0;
};

// Distance of the price iterates to a reference price, and whether the
// contraction inequality dist_{k+1}^2 <= dist_k^2 - (lambda_k - lambda_{k+1})^2
// holds at every step.
ConvergenceDiagnostics convergence_diagnostics(const BiddingTrace& trace,
                                               double lambda_star);

}  // namespace esm
