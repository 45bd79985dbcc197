#include <doctest.h>

#include <cmath>

#include "esm/metrics.hpp"
#include "esm/scenarios.hpp"

using namespace esm;

namespace {

Prosumer quad(int id, double a1, double a2, double b1, double b2, double pmin,
              double pmax, double dmin, double dmax) {
  return Prosumer{id, ConvexCurvePair::quadratic(a1, a2, b1, b2), pmin, pmax, dmin, dmax};
}

MarketInstance twins() {
  return {{quad(1, 0.01, 0.05, -0.008, 0.6, 0.0, 30.0, 5.0, 20.0),
           quad(2, 0.01, 0.05, -0.008, 0.6, 0.0, 30.0, 5.0, 20.0)},
          100.0};
}

}  // namespace

TEST_CASE("sharing payoffs split the equilibrium surplus") {
  MarketInstance inst = builtin_three_prosumer();
  EquilibriumSolution g = solve_gne_direct(inst);

  CHECK(sharing_payoff(inst, g, 0) == doctest::Approx(-6.895904709271536).epsilon(1e-11));
  CHECK(sharing_payoff(inst, g, 1) == doctest::Approx(-2.5992593760994804).epsilon(1e-11));
  CHECK(sharing_payoff(inst, g, 2) == doctest::Approx(-1.4442223921543227).epsilon(1e-11));

  Eigen::VectorXd gamma = sharing_payoffs(inst, g);
  REQUIRE(gamma.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(gamma[i] == sharing_payoff(inst, g, i));

  double total = 0;
  for (int i = 0; i < 3; ++i) total += gamma[i];
  CHECK(total == doctest::Approx(-10.939386477525339).epsilon(1e-12));
  CHECK(total == doctest::Approx(social_objective(inst, g.p, g.d)).epsilon(1e-12));

  CHECK_THROWS_AS(sharing_payoff(inst, g, 3), ParameterError);
  CHECK_THROWS_AS(sharing_payoff(inst, g, -1), ParameterError);

  EquilibriumSolution standalone = solve_self_sufficiency_profile(inst);
  CHECK_THROWS_AS(sharing_payoffs(inst, standalone), ParameterError);
}

TEST_CASE("identical prosumers trade nothing and pay nothing") {
  MarketInstance tw = twins();
  EquilibriumSolution g = solve_gne_direct(tw);
  Eigen::VectorXd gamma = sharing_payoffs(tw, g);
  for (int i = 0; i < 2; ++i) {
    double j = net_cost(tw.prosumers[i], g.p[i], g.d[i]);
    CHECK(gamma[i] == doctest::Approx(j).epsilon(1e-9));
  }
  CHECK(budget_balance_gap(tw, g) <= 1e-9);
}

TEST_CASE("payments cancel across the market") {
  MarketInstance inst = builtin_three_prosumer();
  EquilibriumSolution g = solve_gne_direct(inst);
  CHECK(budget_balance_gap(inst, g) <= 1e-12);
}

TEST_CASE("efficiency ratio of the reference market") {
  MarketInstance inst = builtin_three_prosumer();
  EquilibriumSolution s = solve_social_optimum(inst);
  EquilibriumSolution g = solve_gne_direct(inst);

  double poa = price_of_anarchy(inst, g, s);
  CHECK(poa == doctest::Approx(0.9965515223305565).epsilon(1e-12));
  CHECK(poa <= 1.0);
  CHECK((1.0 - poa) * 100 == doctest::Approx(0.34484776694434865).epsilon(1e-9));

  MarketInstance tw = twins();
  CHECK(price_of_anarchy(tw, solve_gne_direct(tw), solve_social_optimum(tw)) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero social cost leaves the ratio undefined") {
  MarketInstance inst = builtin_three_prosumer();
  EquilibriumSolution s = solve_social_optimum(inst);
  EquilibriumSolution g = solve_gne_direct(inst);
  EquilibriumSolution zero = s;
  zero.p.setZero();
  zero.d.setZero();
  CHECK_THROWS_AS(price_of_anarchy(inst, g, zero), ParameterError);
}

TEST_CASE("sharing leaves no prosumer worse off than standalone") {
  MarketInstance inst = builtin_three_prosumer();
  EquilibriumSolution g = solve_gne_direct(inst);
  ParetoCheck pc = pareto_check(inst, g);

  CHECK(pc.pass);
  CHECK(pc.any_strict);
  CHECK_FALSE(pc.coincide);
  REQUIRE(pc.j_self.size() == 3);
  CHECK(pc.j_self[0] == doctest::Approx(-6.255).epsilon(1e-12));
  CHECK(pc.j_self[1] == doctest::Approx(-2.331920454545455).epsilon(1e-12));
  CHECK(pc.j_self[2] == doctest::Approx(-1.4400000000000002).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) CHECK(pc.gamma[i] <= pc.j_self[i] + 1e-6);
}

TEST_CASE("twins coincide with their standalone operation") {
  MarketInstance tw = twins();
  EquilibriumSolution g = solve_gne_direct(tw);
  ParetoCheck pc = pareto_check(tw, g);
  CHECK(pc.pass);
  CHECK(pc.coincide);
  CHECK_FALSE(pc.any_strict);
}

TEST_CASE("random markets are Pareto improvements over standalone") {
  for (std::uint64_t seed : {101, 202, 303, 404, 505, 606, 707, 808, 909, 1010}) {
    MarketInstance inst = random_instance(6, 100.0, seed);
    EquilibriumSolution g = solve_gne_direct(inst);
    ParetoCheck pc = pareto_check(inst, g);
    CHECK(pc.pass);
  }
}

TEST_CASE("analytic efficiency bound of the reference market") {
  MarketInstance inst = builtin_three_prosumer();
  EquilibriumSolution self = solve_self_sufficiency_profile(inst);
  PoaBound b = poa_lower_bound(inst, self);

  CHECK(b.c1 == 625.0);
  CHECK(b.c2 == doctest::Approx(-1.4400000000000002).epsilon(1e-12));
  CHECK(b.c == doctest::Approx(4.340277777777777).epsilon(1e-12));
  CHECK(b.bound == doctest::Approx(-1.1701388888888884).epsilon(1e-12));

  EquilibriumSolution s = solve_social_optimum(inst);
  EquilibriumSolution g = solve_gne_direct(inst);
  CHECK(price_of_anarchy(inst, g, s) >= b.bound);
}

TEST_CASE("unprofitable standalone operation is reported with every offender") {
  MarketInstance inst;
  inst.a = 100.0;
  inst.prosumers = {quad(1, 0.01, 0.5, -0.01, 0.0, 0.0, 10.0, 5.0, 15.0),
                    quad(2, 0.01, 0.6, -0.01, 0.0, 0.0, 10.0, 5.0, 15.0),
                    builtin_three_prosumer().prosumers[0]};
  inst.prosumers[2].id = 3;
  EquilibriumSolution self = solve_self_sufficiency_profile(inst);
  CHECK_THROWS_AS(poa_lower_bound(inst, self), AssumptionViolation);
  try {
    poa_lower_bound(inst, self);
  } catch (const AssumptionViolation& e) {
    CHECK(e.assumption() == "profitable standalone operation");
    CHECK(e.prosumer_ids() == std::vector<int>{1, 2});
  }
}

TEST_CASE("deviation bound shrinks with the population") {
  MarketInstance inst = builtin_three_prosumer();
  CHECK(gne_social_deviation_bound(inst) == doctest::Approx(15.625).epsilon(1e-12));

  EquilibriumSolution s = solve_social_optimum(inst);
  EquilibriumSolution g = solve_gne_direct(inst);
  double dev = 0;
  for (int i = 0; i < 3; ++i) {
    dev = std::max(dev, std::abs(g.p[i] - s.p[i]));
    dev = std::max(dev, std::abs(g.d[i] - s.d[i]));
  }
  CHECK(dev <= 15.625);
  CHECK(dev == doctest::Approx(1.2637896572679743).epsilon(1e-9));

  MarketInstance single{{inst.prosumers[0]}, 100.0};
  CHECK_THROWS_AS(gne_social_deviation_bound(single), ParameterError);
}

TEST_CASE("outcome report collects every market metric") {
  MarketInstance inst = builtin_three_prosumer();
  EquilibriumSolution s = solve_social_optimum(inst);
  EquilibriumSolution g = solve_gne_direct(inst);
  EquilibriumSolution self = solve_self_sufficiency_profile(inst);
  OutcomeReport rep = make_outcome_report(inst, g, s, self);

  CHECK(rep.total_social == doctest::Approx(-10.977241248844074).epsilon(1e-12));
  CHECK(rep.total_gne == doctest::Approx(-10.93938647752534).epsilon(1e-12));
  CHECK(rep.poa == doctest::Approx(0.9965515223305565).epsilon(1e-12));
  CHECK(rep.poa_abs_gap == doctest::Approx(0.037854771318734).epsilon(1e-9));
  CHECK(rep.poa_bound == doctest::Approx(-1.1701388888888884).epsilon(1e-12));
  CHECK(rep.price_gap == doctest::Approx(0.00960943409126685).epsilon(1e-9));
  CHECK(rep.budget_gap <= 1e-12);
  CHECK(rep.pareto_pass);
  CHECK(rep.pareto_any_strict);

  REQUIRE(rep.j_gne.size() == 3);
  REQUIRE(rep.payment.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(rep.j_gne[i] ==
          doctest::Approx(net_cost(inst.prosumers[i], g.p[i], g.d[i])).epsilon(1e-13));
    CHECK(rep.gamma[i] == doctest::Approx(rep.j_gne[i] + rep.payment[i]).epsilon(1e-12));
  }
  double paid = 0;
  for (int i = 0; i < 3; ++i) paid += rep.payment[i];
  CHECK(std::abs(paid) <= 1e-12);
}

TEST_CASE("outcome report survives unprofitable standalone operation") {
  // The analytic efficiency bound requires every prosumer to profit on its
  // own; the rest of the report does not, so the bound degrades to NaN.
  MarketInstance inst;
  inst.a = 100.0;
  inst.prosumers = {quad(1, 0.01, 0.5, -0.01, 0.0, 0.0, 10.0, 5.0, 15.0),
                    quad(2, 0.01, 0.6, -0.01, 0.0, 0.0, 10.0, 5.0, 15.0),
                    builtin_three_prosumer().prosumers[0]};
  inst.prosumers[2].id = 3;
  EquilibriumSolution s = solve_social_optimum(inst);
  EquilibriumSolution g = solve_gne_direct(inst);
  EquilibriumSolution self = solve_self_sufficiency_profile(inst);
  OutcomeReport rep = make_outcome_report(inst, g, s, self);

  CHECK(std::isnan(rep.poa_bound));
  CHECK(std::isfinite(rep.total_social));
  CHECK(std::isfinite(rep.total_gne));
  CHECK(std::isfinite(rep.poa));
  CHECK(rep.total_gne >= rep.total_social - 1e-9);
  CHECK(rep.budget_gap <= 1e-9);
  REQUIRE(rep.j_gne.size() == 3);
}
