#include "esm/bidding.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "esm/random.hpp"

namespace esm {

double prosumer_bid_update(const Prosumer& prosumer, double lambda, double a, int I,
                           BidMode mode, double subproblem_tol, double* p_out,
                           double* d_out) {
  double p, d;
  if (mode == BidMode::strategic) {
    ResponsePoint r = solve_surrogate_best_response(prosumer, lambda, a, I, subproblem_tol);
    p = r.p;
    d = r.d;
  } else {
    p = prosumer.curves.production_response(lambda, prosumer.p_min, prosumer.p_max);
    d = prosumer.curves.demand_response(lambda, prosumer.d_min, prosumer.d_max);
  }
  if (p_out) *p_out = p;
  if (d_out) *d_out = d;
  return d - p + a * lambda;
}

double platform_clear(const Eigen::VectorXd& b, double a) {
  if (b.size() == 0) throw ParameterError("cannot clear an empty bid vector");
  if (!(a > 0)) throw ParameterError("market sensitivity must be positive");
  double s = 0;
  for (Eigen::Index i = 0; i < b.size(); ++i) s += b[i];
  return s / (a * static_cast<double>(b.size()));
}

std::pair<EquilibriumSolution, BiddingTrace> run_bidding(const MarketInstance& instance,
                                                         const BiddingConfig& config) {
  validate_instance(instance, 2);
  if (!(config.epsilon > 0)) throw ParameterError("epsilon must be positive");
  if (config.max_iterations < 1) throw ParameterError("max_iterations must be at least 1");
  if (config.miss_probability < 0 || config.miss_probability >= 1)
    throw ParameterError("miss probability must lie in [0, 1)");
  if (config.max_delay < 1) throw ParameterError("max_delay must be at least 1");

  const int I = instance.size();
  const double a = instance.a;
  const bool async = config.schedule == Schedule::async;
  const bool strategic = config.mode == BidMode::strategic;
  std::mt19937_64 gen(config.seed);

  double lam = config.initial_price;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(I);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(I);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(I);
  std::vector<bool> have_bid(I, false);
  std::vector<int> misses(I, 0);

  auto [blo, bhi] = price_bracket(instance);
  const double div_limit = 1e6 * (bhi - blo);
  const int window = async ? config.max_delay : 1;

  BiddingTrace trace;
  trace.initial_price = lam;
  trace.sensitivity_satisfied = a >= min_market_sensitivity(instance.prosumers, I);
  trace.termination = Termination::max_iterations;

  int iterations = config.max_iterations;
  int small = 0;
  double gap = 0;
  for (int it = 1; it <= config.max_iterations; ++it) {
    IterationRecord rec;
    rec.k = it;
    rec.lambda_prev = lam;
    rec.updated.assign(I, true);
    for (int i = 0; i < I; ++i) {
      bool skip = false;
      if (async) {
        bool miss = canonical(gen) < config.miss_probability;
        if (miss && have_bid[i] && misses[i] + 1 < config.max_delay) skip = true;
      }
      if (skip) {
        misses[i] += 1;
        rec.updated[i] = false;
        continue;
      }
      misses[i] = 0;
      have_bid[i] = true;
      b[i] = prosumer_bid_update(instance.prosumers[i], lam,
                                 a, I, config.mode, config.subproblem_tol, &p[i], &d[i]);
    }
    double new_lam = platform_clear(b, a);
    gap = std::abs(new_lam - lam);
    lam = new_lam;
    rec.lambda = lam;
    rec.p = p;
    rec.d = d;
    rec.b = b;
    trace.records.push_back(std::move(rec));
    small = gap <= config.epsilon ? small + 1 : 0;
    if (small >= window) {
      trace.termination = Termination::converged;
      iterations = it;
      break;
    }
    if (std::abs(lam) > div_limit) {
      trace.termination = Termination::diverged;
      iterations = it;
      break;
    }
  }
  trace.final_gap = gap;

  if (trace.termination == Termination::converged) {
    for (int i = 0; i < I; ++i)
      b[i] = prosumer_bid_update(instance.prosumers[i], lam, a, I, config.mode,
                                 config.subproblem_tol, &p[i], &d[i]);
  }

  EquilibriumSolution sol;
  sol.mode = strategic ? SolutionMode::gne : SolutionMode::social;
  sol.p = p;
  sol.d = d;
  sol.b = b;
  sol.lambda = lam;
  sol.dual = lam;
  sol.iterations = iterations;
  double sp = 0, sd = 0;
  for (int i = 0; i < I; ++i) {
    sp += p[i];
    sd += d[i];
  }
  sol.balance_gap = std::abs(sp - sd);
  sol.kkt = kkt_residual(instance, sol);
  return {sol, trace};
}

ConvergenceDiagnostics convergence_diagnostics(const BiddingTrace& trace,
                                               double lambda_star) {
  ConvergenceDiagnostics diag;
  diag.iterations = static_cast<int>(trace.records.size());
  diag.distances.push_back(std::abs(trace.initial_price - lambda_star));
  for (const auto& rec : trace.records) {
    diag.distances.push_back(std::abs(rec.lambda - lambda_star));
    double prev = std::abs(rec.lambda_prev - lambda_star);
    double cur = diag.distances.back();
    double step = rec.lambda - rec.lambda_prev;
    double violation = cur * cur - (prev * prev - step * step);
    diag.worst_violation = std::max(diag.worst_violation, violation);
    diag.final_gap = std::abs(step);
  }
  diag.monotone = diag.worst_violation <= 1e-12;
  return diag;
}

}  // namespace esm
