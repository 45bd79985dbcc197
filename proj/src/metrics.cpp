#include "esm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esm/bidding.hpp"

namespace esm {

namespace {

void require_bids(const MarketInstance& instance, const EquilibriumSolution& solution) {
  if (solution.b.size() != instance.size())
    throw ParameterError("solution carries no bids; sharing payoffs need a cleared market");
}

}  // namespace

double sharing_payoff(const MarketInstance& instance, const EquilibriumSolution& solution,
                      int i) {
  require_bids(instance, solution);
  if (i < 0 || i >= instance.size()) throw ParameterError("prosumer index out of range");
  const double lam = platform_clear(solution.b, instance.a);
  const double q = -instance.a * lam + solution.b[i];
  return net_cost(instance.prosumers[i], solution.p[i], solution.d[i]) + lam * q;
}

Eigen::VectorXd sharing_payoffs(const MarketInstance& instance,
                                const EquilibriumSolution& solution) {
  require_bids(instance, solution);
  const int I = instance.size();
  const double lam = platform_clear(solution.b, instance.a);
  Eigen::VectorXd gamma(I);
  for (int i = 0; i < I; ++i) {
    const double q = -instance.a * lam + solution.b[i];
    gamma[i] = net_cost(instance.prosumers[i], solution.p[i], solution.d[i]) + lam * q;
  }
  return gamma;
}

double budget_balance_gap(const MarketInstance& instance,
                          const EquilibriumSolution& solution) {
  require_bids(instance, solution);
  const double lam = platform_clear(solution.b, instance.a);
  double s = 0;
  for (int i = 0; i < instance.size(); ++i)
    s += lam * (-instance.a * lam + solution.b[i]);
  return std::abs(s);
}

double price_of_anarchy(const MarketInstance& instance, const EquilibriumSolution& gne,
                        const EquilibriumSolution& social) {
  const double js = social_objective(instance, social.p, social.d);
  const double jg = social_objective(instance, gne.p, gne.d);
  if (js == 0.0)
    throw ParameterError("price of anarchy undefined: social optimum has zero total cost");
  return jg / js;
}

ParetoCheck pareto_check(const MarketInstance& instance, const EquilibriumSolution& gne,
                         double tol) {
  const int I = instance.size();
  ParetoCheck check;
  check.gamma = sharing_payoffs(instance, gne);
  check.j_self.resize(I);
  check.coincide = true;
  for (int i = 0; i < I; ++i) {
    auto [xs, js] = solve_self_sufficiency(instance.prosumers[i]);
    check.j_self[i] = js;
    if (check.gamma[i] > check.j_self[i] + tol) check.pass = false;
    if (check.gamma[i] < check.j_self[i] - tol) check.any_strict = true;
    if (std::abs(gne.p[i] - xs) > tol || std::abs(gne.d[i] - xs) > tol)
      check.coincide = false;
  }
  return check;
}

PoaBound poa_lower_bound(const MarketInstance& instance,
                         const EquilibriumSolution& self_profile) {
  const int I = instance.size();
  if (self_profile.p.size() != I || self_profile.d.size() != I)
    throw ParameterError("standalone profile size does not match instance");
  PoaBound res;
  std::vector<int> offenders;
  bool first = true;
  for (int i = 0; i < I; ++i) {
    const auto& q = instance.prosumers[i];
    const double width = std::max((q.p_min - q.d_max) * (q.p_min - q.d_max),
                                  (q.p_max - q.d_min) * (q.p_max - q.d_min));
    res.c1 = first ? width : std::max(res.c1, width);
    const double j = net_cost(q, self_profile.p[i], self_profile.d[i]);
    if (!(j < 0)) offenders.push_back(q.id);
    res.c2 = first ? j : std::max(res.c2, j);
    first = false;
  }
  if (!offenders.empty())
    throw AssumptionViolation("profitable standalone operation", offenders,
                              "standalone net cost is not negative for every prosumer");
  res.c = res.c1 / (instance.a * std::abs(res.c2));
  res.bound = 1 - res.c / (I - 1);
  return res;
}

double gne_social_deviation_bound(const MarketInstance& instance) {
  const int I = instance.size();
  if (I < 2) throw ParameterError("deviation bound needs at least two prosumers");
  double gamma = 0, pop_pmax = 0, pop_pmin = 0, pop_dmax = 0, pop_dmin = 0;
  bool first = true;
  for (const auto& q : instance.prosumers) {
    gamma = std::max(gamma, max_response_slope(q));
    pop_pmax = first ? q.p_max : std::max(pop_pmax, q.p_max);
    pop_pmin = first ? q.p_min : std::min(pop_pmin, q.p_min);
    pop_dmax = first ? q.d_max : std::max(pop_dmax, q.d_max);
    pop_dmin = first ? q.d_min : std::min(pop_dmin, q.d_min);
    first = false;
  }
  const double sigma =
      std::max(std::abs(pop_pmax - pop_dmin), std::abs(pop_pmin - pop_dmax)) / instance.a;
  return 2 * gamma * sigma / (I - 1);
}

OutcomeReport make_outcome_report(const MarketInstance& instance,
                                  const EquilibriumSolution& gne,
                                  const EquilibriumSolution& social,
                                  const EquilibriumSolution& self_profile) {
  const int I = instance.size();
  OutcomeReport rep;
  rep.gamma = sharing_payoffs(instance, gne);
  rep.j_gne.resize(I);
  rep.payment.resize(I);
  for (int i = 0; i < I; ++i) {
    rep.j_gne[i] = net_cost(instance.prosumers[i], gne.p[i], gne.d[i]);
    rep.payment[i] = rep.gamma[i] - rep.j_gne[i];
  }
  rep.total_social = social_objective(instance, social.p, social.d);
  rep.total_gne = social_objective(instance, gne.p, gne.d);
  rep.poa = price_of_anarchy(instance, gne, social);
  rep.poa_abs_gap = rep.total_gne - rep.total_social;
  try {
    rep.poa_bound = poa_lower_bound(instance, self_profile).bound;
  } catch (const AssumptionViolation&) {
    rep.poa_bound = std::numeric_limits<double>::quiet_NaN();
  }
  rep.price_gap = std::abs(gne.lambda - social.lambda);
  rep.budget_gap = budget_balance_gap(instance, gne);
  ParetoCheck pc = pareto_check(instance, gne);
  rep.pareto_pass = pc.pass;
  rep.pareto_any_strict = pc.any_strict;
  return rep;
}

}  // namespace esm
