#include "esm/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "esm/random.hpp"

namespace esm {

MarketInstance builtin_three_prosumer() {
  MarketInstance inst;
  inst.a = 100.0;
  inst.prosumers = {
      {1, ConvexCurvePair::quadratic(0.015, 0.038, -0.008, 0.8), 0, 20, 5, 15},
      {2, ConvexCurvePair::quadratic(0.008, 0.047, -0.014, 0.5), 0, 25, 7, 18},
      {3, ConvexCurvePair::quadratic(0.011, 0.056, -0.009, 0.4), 0, 30, 10, 25},
  };
  return inst;
}

Prosumer draw_prosumer(std::mt19937_64& gen, int id) {
  const double a1 = uniform(gen, 0.01, 0.02);
  const double a2 = uniform(gen, 0.02, 0.08);
  const double b1 = uniform(gen, -0.01, -0.005);
  const double b2 = uniform(gen, 0.0, 1.0);
  const double pmax = uniform(gen, 20.0, 40.0);
  const double dmin = uniform(gen, 5.0, 10.0);
  const double dmax = uniform(gen, 15.0, 30.0);
  return Prosumer{id, ConvexCurvePair::quadratic(a1, a2, b1, b2), 0.0, pmax, dmin, dmax};
}

MarketInstance random_instance(int I, double a, std::uint64_t seed) {
  if (I < 2) throw ParameterError("random instance needs at least two prosumers");
  std::mt19937_64 gen(seed);
  MarketInstance inst;
  inst.a = a;
  inst.prosumers.reserve(I);
  for (int i = 0; i < I; ++i) inst.prosumers.push_back(draw_prosumer(gen, i + 1));
  validate_instance(inst, 2);
  return inst;
}

MarketInstance random_instance_profitable(int I, double a, std::uint64_t seed,
                                          int max_tries) {
  if (I < 2) throw ParameterError("random instance needs at least two prosumers");
  std::mt19937_64 gen(seed);
  MarketInstance inst;
  inst.a = a;
  inst.prosumers.reserve(I);
  for (int i = 0; i < I; ++i) {
    bool placed = false;
    for (int t = 0; t < max_tries && !placed; ++t) {
      Prosumer q = draw_prosumer(gen, i + 1);
      auto [x, j] = solve_self_sufficiency(q);
      (void)x;
      if (j < 0) {
        inst.prosumers.push_back(std::move(q));
        placed = true;
      }
    }
    if (!placed)
      throw AssumptionViolation("profitable standalone operation", {i + 1},
                                "could not draw a prosumer with negative standalone cost");
  }
  validate_instance(inst, 2);
  return inst;
}

std::vector<double> misreport_scale_grid() {
  std::vector<double> scales(41);
  for (int k = 0; k < 41; ++k) scales[k] = 0.8 + 0.01 * k;
  return scales;
}

namespace {

std::vector<std::string> per_prosumer_columns(const std::string& prefix, int I) {
  std::vector<std::string> cols;
  for (int i = 1; i <= I; ++i) cols.push_back(prefix + std::to_string(i));
  return cols;
}

// Best response of the misreporting prosumer's exact subproblem when every
// other bid stays fixed: the clearing price seen by the deviator is
// lam0 + (d - p) / (a (I - 1)) with lam0 set by the others' bids, and the
// full quadratic (d - p)^2 / (a (I - 1)) enters its payoff, so the
// stationarity fixed point carries coefficient 2 instead of the surrogate's 1.
struct UnilateralResponse {
  double p, d, b, lambda;
};

UnilateralResponse unilateral_best_response(const Prosumer& reported, double lam0,
                                            double b_others, double a, int I) {
  const double A = a * (I - 1);
  auto g = [&](double mu) {
    double d = reported.curves.demand_response(mu, reported.d_min, reported.d_max);
    double p = reported.curves.production_response(mu, reported.p_min, reported.p_max);
    return mu - lam0 - 2 * (d - p) / A;
  };
  double lo = lam0 - 2 * (reported.p_max - reported.d_min) / A - 1;
  double hi = lam0 + 2 * (reported.d_max - reported.p_min) / A + 1;
  for (int k = 0; k < 200; ++k) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) < 0)
      lo = mid;
    else
      hi = mid;
  }
  const double mu = 0.5 * (lo + hi);
  UnilateralResponse r;
  r.p = reported.curves.production_response(mu, reported.p_min, reported.p_max);
  r.d = reported.curves.demand_response(mu, reported.d_min, reported.d_max);
  r.lambda = lam0 + (r.d - r.p) / A;
  r.b = (r.d - r.p + b_others / I) * I / (I - 1);
  return r;
}

}  // namespace

ScenarioReport misreport_sweep(const MarketInstance& instance, int target, Regime regime,
                               const std::vector<double>& scales) {
  validate_instance(instance, 2);
  const int I = instance.size();
  if (target < 0 || target >= I) throw ParameterError("misreport target index out of range");
  for (double s : scales)
    if (!(s > 0)) throw ParameterError("misreport scales must be positive");

  ScenarioReport rep;
  rep.tag = regime == Regime::sharing ? "misreport_sharing" : "misreport_centralized";
  rep.columns = {"scale"};
  auto ucols = per_prosumer_columns("utility_", I);
  rep.columns.insert(rep.columns.end(), ucols.begin(), ucols.end());
  rep.columns.push_back("total");

  const Prosumer& truth = instance.prosumers[target];

  if (regime == Regime::sharing) {
    EquilibriumSolution gne = solve_gne_direct(instance);
    double sum_b = 0;
    for (int i = 0; i < I; ++i) sum_b += gne.b[i];
    const double b_others = sum_b - gne.b[target];
    const double lam0 = b_others / (instance.a * (I - 1));
    for (double s : scales) {
      Prosumer reported = truth;
      reported.curves = truth.curves.scaled(s);
      UnilateralResponse r =
          unilateral_best_response(reported, lam0, b_others, instance.a, I);
      std::vector<double> row{s};
      double total = 0;
      for (int i = 0; i < I; ++i) {
        double p = i == target ? r.p : gne.p[i];
        double d = i == target ? r.d : gne.d[i];
        double b = i == target ? r.b : gne.b[i];
        double q = -instance.a * r.lambda + b;
        double gamma = net_cost(instance.prosumers[i], p, d) + r.lambda * q;
        row.push_back(-gamma);
        total += -gamma;
      }
      row.push_back(total);
      rep.rows.push_back(std::move(row));
    }
  } else {
    for (double s : scales) {
      MarketInstance seen = instance;
      seen.prosumers[target].curves = truth.curves.scaled(s);
      EquilibriumSolution social = solve_social_optimum(seen);
      std::vector<double> row{s};
      double total = 0;
      for (int i = 0; i < I; ++i) {
        double j = net_cost(instance.prosumers[i], social.p[i], social.d[i]);
        row.push_back(-j);
        total += -j;
      }
      row.push_back(total);
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

ScenarioReport poa_vs_size(const std::vector<int>& sizes, double a, int n_seeds) {
  for (int I : sizes)
    if (I < 2) throw ParameterError("population sizes must be at least 2");
  if (n_seeds < 1) throw ParameterError("need at least one seed");
  ScenarioReport rep;
  rep.tag = "poa_vs_size";
  rep.columns = {"seed", "I", "poa", "bound"};
  for (int seed = 1; seed <= n_seeds; ++seed) {
    for (int I : sizes) {
      MarketInstance inst = random_instance_profitable(I, a, mix_seed(seed, I));
      EquilibriumSolution social = solve_social_optimum(inst);
      EquilibriumSolution gne = solve_gne_direct(inst);
      EquilibriumSolution self = solve_self_sufficiency_profile(inst);
      const double poa = price_of_anarchy(inst, gne, social);
      const double bound = poa_lower_bound(inst, self).bound;
      rep.rows.push_back({static_cast<double>(seed), static_cast<double>(I), poa, bound});
    }
  }
  return rep;
}

ScenarioReport diversity_experiment(int I, const std::vector<int>& type_counts,
                                    int n_draws, double a, std::uint64_t seed) {
  if (I < 2) throw ParameterError("diversity experiment needs at least two prosumers");
  if (n_draws < 1) throw ParameterError("need at least one draw");
  for (int k : type_counts) {
    if (k < 1) throw ParameterError("type counts must be positive");
    if (I % k != 0)
      throw ParameterError("type count " + std::to_string(k) + " does not divide " +
                           std::to_string(I));
  }
  ScenarioReport rep;
  rep.tag = "diversity";
  rep.columns = {"k", "draws", "mean_saving", "var_saving", "min_saving"};
  for (int k : type_counts) {
    std::vector<double> savings;
    savings.reserve(n_draws);
    for (int draw = 0; draw < n_draws; ++draw) {
      std::mt19937_64 gen(mix_seed(seed + draw, k));
      std::vector<Prosumer> types;
      types.reserve(k);
      for (int t = 0; t < k; ++t) {
        bool placed = false;
        for (int tries = 0; tries < 1000 && !placed; ++tries) {
          Prosumer q = draw_prosumer(gen, t + 1);
          auto [x, j] = solve_self_sufficiency(q);
          (void)x;
          if (j < 0) {
            types.push_back(std::move(q));
            placed = true;
          }
        }
        if (!placed)
          throw AssumptionViolation("profitable standalone operation", {t + 1},
                                    "could not draw a profitable prosumer type");
      }
      MarketInstance inst;
      inst.a = a;
      inst.prosumers.reserve(I);
      for (int i = 0; i < I; ++i) {
        Prosumer q = types[i % k];
        q.id = i + 1;
        inst.prosumers.push_back(std::move(q));
      }
      double j_self = 0;
      for (const auto& q : inst.prosumers) {
        auto [x, j] = solve_self_sufficiency(q);
        (void)x;
        j_self += j;
      }
      EquilibriumSolution gne = solve_gne_direct(inst);
      const double j_gne = social_objective(inst, gne.p, gne.d);
      savings.push_back((j_self - j_gne) / std::abs(j_self));
    }
    double mean = 0;
    for (double s : savings) mean += s;
    mean /= savings.size();
    double var = 0;
    double lowest = savings[0];
    for (double s : savings) {
      var += (s - mean) * (s - mean);
      lowest = std::min(lowest, s);
    }
    var /= savings.size();
    rep.rows.push_back({static_cast<double>(k), static_cast<double>(n_draws), mean, var,
                        lowest});
  }
  return rep;
}

ScenarioReport delay_experiment(const MarketInstance& instance, const BiddingConfig& base,
                                const std::vector<int>& delays, int n_seeds) {
  for (int D : delays)
    if (D < 1) throw ParameterError("delays must be at least 1");
  if (n_seeds < 1) throw ParameterError("need at least one seed");
  ScenarioReport rep;
  rep.tag = "delay";
  rep.columns = {"delay", "seed", "converged", "iterations", "lambda"};
  for (int D : delays) {
    for (int seed = 1; seed <= n_seeds; ++seed) {
      BiddingConfig cfg = base;
      cfg.schedule = Schedule::async;
      cfg.max_delay = D;
      cfg.seed = seed;
      auto [sol, trace] = run_bidding(instance, cfg);
      rep.rows.push_back({static_cast<double>(D), static_cast<double>(seed),
                          trace.termination == Termination::converged ? 1.0 : 0.0,
                          static_cast<double>(sol.iterations), sol.lambda});
    }
  }
  return rep;
}

ScenarioReport sensitivity_experiment(const MarketInstance& instance,
                                      const std::vector<double>& a_values,
                                      const BiddingConfig& config) {
  ScenarioReport rep;
  rep.tag = "sensitivity";
  rep.columns = {"a", "converged", "iterations", "lambda", "a_min"};
  const double a_min =
      min_market_sensitivity(instance.prosumers, instance.size());
  for (double a : a_values) {
    MarketInstance scaled = instance;
    scaled.a = a;
    auto [sol, trace] = run_bidding(scaled, config);
    rep.rows.push_back({a, trace.termination == Termination::converged ? 1.0 : 0.0,
                        static_cast<double>(sol.iterations), sol.lambda, a_min});
  }
  return rep;
}

}  // namespace esm
