#include "esm/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace esm {

namespace {

// Activity tolerance when assigning bound multipliers in kkt_residual.
constexpr double kActiveTol = 1e-7;

double effective_bisection_tol(double tol) { return std::min(tol, kBisectionTol); }

// Edges of the (possibly flat) root segment of a nondecreasing excess curve.
// A strictly increasing excess collapses the interval to the root itself.
void probe_dual_interval(const std::function<double(double)>& excess, double lo,
                         double hi, double root, double tol, double* dual_lo,
                         double* dual_hi) {
  const double shift = kBalanceTol;
  *dual_lo = root;
  *dual_hi = root;
  auto left = [&](double x) { return excess(x) + shift; };
  auto right = [&](double x) { return excess(x) - shift; };
  if (left(lo) > 0) {
    *dual_lo = lo;
  } else if (left(root) > 0) {
    *dual_lo = bisect_price(left, lo, root, tol).root;
  }
  if (right(hi) < 0) {
    *dual_hi = hi;
  } else if (right(root) < 0) {
    *dual_hi = bisect_price(right, root, hi, tol).root;
  }
}

}  // namespace

void validate_instance(const MarketInstance& instance, int min_size) {
  if (!(instance.a > 0)) throw ParameterError("market sensitivity must be positive");
  if (instance.size() < min_size)
    throw ParameterError("instance needs at least " + std::to_string(min_size) +
                         " prosumers, got " + std::to_string(instance.size()));
  double sum_pmin = 0, sum_pmax = 0, sum_dmin = 0, sum_dmax = 0;
  for (const auto& q : instance.prosumers) {
    validate_prosumer(q);
    sum_pmin += q.p_min;
    sum_pmax += q.p_max;
    sum_dmin += q.d_min;
    sum_dmax += q.d_max;
  }
  if (sum_pmin > sum_dmax)
    throw AssumptionViolation(
        "aggregate feasibility", {},
        "no balanced profile: total minimum production exceeds total maximum demand");
  if (sum_dmin > sum_pmax)
    throw AssumptionViolation(
        "aggregate feasibility", {},
        "no balanced profile: total minimum demand exceeds total maximum production");
}

double aggregate_excess(const MarketInstance& instance, double price, ExcessMode mode,
                        double tol) {
  double s = 0.0;
  if (mode == ExcessMode::social) {
    for (const auto& q : instance.prosumers) {
      s += q.curves.production_response(price, q.p_min, q.p_max) -
           q.curves.demand_response(price, q.d_min, q.d_max);
    }
  } else {
    for (const auto& q : instance.prosumers) {
      ResponsePoint r = solve_surrogate_best_response(q, price, instance.a,
                                                      instance.size(), tol);
      s += r.p - r.d;
    }
  }
  return s;
}

std::pair<double, double> price_bracket(const MarketInstance& instance) {
  double lo = 0, hi = 0;
  bool first = true;
  for (const auto& q : instance.prosumers) {
    double l = std::min(q.curves.f_prime(q.p_min), q.curves.u_prime(q.d_max));
    double h = std::max(q.curves.f_prime(q.p_max), q.curves.u_prime(q.d_min));
    lo = first ? l : std::min(lo, l);
    hi = first ? h : std::max(hi, h);
    first = false;
  }
  return {lo - 1.0, hi + 1.0};
}

BisectionResult bisect_price(const std::function<double(double)>& fn, double lo,
                             double hi, double tol, int max_iterations) {
  double flo = fn(lo);
  double fhi = fn(hi);
  if (flo > 0 || fhi < 0)
    throw BracketError("no sign change across the price bracket", flo, fhi);
  BisectionResult res;
  for (int k = 0; k < max_iterations; ++k) {
    double mid = 0.5 * (lo + hi);
    if (fn(mid) < 0)
      lo = mid;
    else
      hi = mid;
    res.iterations = k + 1;
    if (hi - lo <= tol) break;
  }
  res.root = 0.5 * (lo + hi);
  return res;
}

EquilibriumSolution solve_social_optimum(const MarketInstance& instance, double tol) {
  validate_instance(instance, 1);
  auto [lo, hi] = price_bracket(instance);
  auto excess = [&](double x) { return aggregate_excess(instance, x, ExcessMode::social); };
  const double bt = effective_bisection_tol(tol);
  BisectionResult bis = bisect_price(excess, lo, hi, bt);

  EquilibriumSolution sol;
  sol.mode = SolutionMode::social;
  const int I = instance.size();
  sol.p.resize(I);
  sol.d.resize(I);
  double sp = 0, sd = 0;
  for (int i = 0; i < I; ++i) {
    const auto& q = instance.prosumers[i];
    sol.p[i] = q.curves.production_response(bis.root, q.p_min, q.p_max);
    sol.d[i] = q.curves.demand_response(bis.root, q.d_min, q.d_max);
    sp += sol.p[i];
    sd += sol.d[i];
  }
  sol.lambda = bis.root;
  sol.dual = bis.root;
  sol.iterations = bis.iterations;
  sol.balance_gap = std::abs(sp - sd);
  probe_dual_interval(excess, lo, hi, bis.root, bt, &sol.dual_lo, &sol.dual_hi);
  sol.kkt = kkt_residual(instance, sol);
  return sol;
}

EquilibriumSolution solve_gne_direct(const MarketInstance& instance, double tol) {
  validate_instance(instance, 2);
  auto [lo, hi] = price_bracket(instance);
  double widest = 0;
  bool first = true;
  for (const auto& q : instance.prosumers) {
    widest = first ? q.d_max - q.p_min : std::max(widest, q.d_max - q.p_min);
    first = false;
  }
  const double w = widest / (instance.a * (instance.size() - 1)) + 1.0;
  auto excess = [&](double x) {
    return aggregate_excess(instance, x, ExcessMode::penalized, kSurrogateTol);
  };
  const double bt = effective_bisection_tol(tol);
  BisectionResult bis = bisect_price(excess, lo - w, hi + w, bt);

  EquilibriumSolution sol;
  sol.mode = SolutionMode::gne;
  const int I = instance.size();
  sol.p.resize(I);
  sol.d.resize(I);
  double sp = 0, sd = 0;
  for (int i = 0; i < I; ++i) {
    ResponsePoint r = solve_surrogate_best_response(instance.prosumers[i], bis.root,
                                                    instance.a, I, kSurrogateTol);
    sol.p[i] = r.p;
    sol.d[i] = r.d;
    sp += r.p;
    sd += r.d;
  }
  sol.lambda = bis.root;
  sol.dual = bis.root;
  sol.iterations = bis.iterations;
  sol.balance_gap = std::abs(sp - sd);
  sol.b = recover_bids(sol.p, sol.d, bis.root, instance.a);
  probe_dual_interval(excess, lo - w, hi + w, bis.root, bt, &sol.dual_lo, &sol.dual_hi);
  sol.kkt = kkt_residual(instance, sol);
  return sol;
}

EquilibriumSolution solve_self_sufficiency_profile(const MarketInstance& instance) {
  validate_instance(instance, 1);
  EquilibriumSolution sol;
  sol.mode = SolutionMode::self_sufficiency;
  const int I = instance.size();
  sol.p.resize(I);
  sol.d.resize(I);
  for (int i = 0; i < I; ++i) {
    auto [x, j] = solve_self_sufficiency(instance.prosumers[i]);
    (void)j;
    sol.p[i] = x;
    sol.d[i] = x;
  }
  return sol;
}

Eigen::VectorXd recover_bids(const Eigen::VectorXd& p, const Eigen::VectorXd& d,
                             double zeta, double a, double tol) {
  if (p.size() != d.size()) throw ParameterError("production/demand size mismatch");
  double sp = 0, sd = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    sp += p[i];
    sd += d[i];
  }
  if (std::abs(sp - sd) > tol)
    throw ConsistencyError("cannot recover bids: profile imbalance " +
                           std::to_string(std::abs(sp - sd)) + " exceeds tolerance");
  Eigen::VectorXd b(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) b[i] = d[i] - p[i] + a * zeta;
  return b;
}

double kkt_residual(const MarketInstance& instance, const EquilibriumSolution& solution) {
  if (solution.mode == SolutionMode::self_sufficiency)
    throw ParameterError("first-order residual is defined for market solutions only");
  const int I = instance.size();
  if (solution.p.size() != I || solution.d.size() != I)
    throw ParameterError("solution size does not match instance");
  const bool gne = solution.mode == SolutionMode::gne;
  double worst = 0;
  double sp = 0, sd = 0;
  for (int i = 0; i < I; ++i) {
    const auto& q = instance.prosumers[i];
    const double p = solution.p[i];
    const double d = solution.d[i];
    sp += p;
    sd += d;
    double mu = solution.dual;
    if (gne) mu += (d - p) / (instance.a * (I - 1));
    const double fp = q.curves.f_prime(p);
    const double up = q.curves.u_prime(d);

    double best_p = std::abs(fp - mu);  // inactive multipliers
    if (p <= q.p_min + kActiveTol) best_p = std::min(best_p, std::max(0.0, mu - fp));
    if (p >= q.p_max - kActiveTol) best_p = std::min(best_p, std::max(0.0, fp - mu));
    double best_d = std::abs(up - mu);
    if (d <= q.d_min + kActiveTol) best_d = std::min(best_d, std::max(0.0, up - mu));
    if (d >= q.d_max - kActiveTol) best_d = std::min(best_d, std::max(0.0, mu - up));
    worst = std::max({worst, best_p, best_d});

    worst = std::max({worst, q.p_min - p, p - q.p_max, q.d_min - d, d - q.d_max});
    if (gne && solution.b.size() == I)
      worst = std::max(worst,
                       std::abs(solution.b[i] - (d - p + instance.a * solution.lambda)));
  }
  worst = std::max(worst, std::abs(sp - sd));
  return worst;
}

double social_objective(const MarketInstance& instance, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& d) {
  double s = 0;
  for (int i = 0; i < instance.size(); ++i)
    s += net_cost(instance.prosumers[i], p[i], d[i]);
  return s;
}

double penalized_objective(const MarketInstance& instance, const Eigen::VectorXd& p,
                           const Eigen::VectorXd& d) {
  if (instance.size() < 2)
    throw ParameterError("penalized objective needs at least two prosumers");
  double s = social_objective(instance, p, d);
  double pen = 0;
  for (int i = 0; i < instance.size(); ++i) pen += (d[i] - p[i]) * (d[i] - p[i]);
  return s + pen / (2 * instance.a * (instance.size() - 1));
}

}  // namespace esm
