#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "esm/prosumer.hpp"

namespace esm {

struct MarketInstance {
  std::vector<Prosumer> prosumers;
  double a = 100.0;  // sharing price sensitivity

  int size() const { return static_cast<int>(prosumers.size()); }
};

// Validates every prosumer, a > 0, the minimum population for the requested
// use (1 standalone, 2 for any sharing computation), and aggregate
// feasibility: sum p_min <= sum d_max and sum d_min <= sum p_max, otherwise
// no balanced profile exists.
void validate_instance(const MarketInstance& instance, int min_size = 2);

enum class ExcessMode { social, penalized };
enum class SolutionMode { social, gne, self_sufficiency };

struct EquilibriumSolution {
  SolutionMode mode = SolutionMode::social;
  Eigen::VectorXd p;
  Eigen::VectorXd d;
  Eigen::VectorXd b;  // empty unless bids were recovered
  double lambda = 0;  // clearing price aI * lambda = sum b (gne); dual (social)
  double dual = 0;
  double dual_lo = 0;
  double dual_hi = 0;
  double kkt = 0;
  int iterations = 0;
  double balance_gap = 0;
};

// Aggregate excess supply at a candidate price. In social mode every
// prosumer responds to the price directly; in penalized mode each solves its
// surrogate best response at the price.
double aggregate_excess(const MarketInstance& instance, double price, ExcessMode mode,
                        double tol = kSurrogateTol);

// Price interval that brackets the market-clearing root: below the lower end
// every prosumer oversupplies relative to demand, above the upper end the
// reverse. Derivative ranges over the boxes give the endpoints.
std::pair<double, double> price_bracket(const MarketInstance& instance);

struct BisectionResult {
  double root = 0;
  int iterations = 0;
};

// Bisection on a nondecreasing function with fn(lo) <= 0 <= fn(hi).
// Throws BracketError when the bracket does not straddle a sign change.
BisectionResult bisect_price(const std::function<double(double)>& fn, double lo,
                             double hi, double tol = kBisectionTol,
                             int max_iterations = 200);

// Centralized social optimum: unique balanced profile minimizing
// sum_i f_i(p_i) - u_i(d_i), found by bisection on the balance dual.
EquilibriumSolution solve_social_optimum(const MarketInstance& instance,
                                         double tol = kPriceTol);

// Generalized Nash equilibrium of the sharing game, computed directly as the
// optimum of the penalized program (no bid iteration).
EquilibriumSolution solve_gne_direct(const MarketInstance& instance,
                                     double tol = kPriceTol);

// Standalone profile: every prosumer at its self-sufficiency point.
EquilibriumSolution solve_self_sufficiency_profile(const MarketInstance& instance);

// Bids consistent with a GNE profile at clearing price zeta:
// b_i = d_i - p_i + a * zeta. Throws ConsistencyError when the recovered
// bids fail to reproduce zeta within tol.
Eigen::VectorXd recover_bids(const Eigen::VectorXd& p, const Eigen::VectorXd& d,
                             double zeta, double a, double tol = kBalanceTol);

// Worst first-order optimality violation of a profile: stationarity of each
// coordinate against its effective price (with bound multipliers eliminated),
// box and balance feasibility, and bid consistency when bids are present.
double kkt_residual(const MarketInstance& instance, const EquilibriumSolution& solution);

double social_objective(const MarketInstance& instance, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& d);

double penalized_objective(const MarketInstance& instance, const Eigen::VectorXd& p,
                           const Eigen::VectorXd& d);

}  // namespace esm
