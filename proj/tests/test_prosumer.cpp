#include <doctest.h>

#include <cmath>
#include <random>

#include "esm/prosumer.hpp"
#include "esm/random.hpp"
#include "esm/scenarios.hpp"

using namespace esm;

namespace {

Prosumer quad(int id, double a1, double a2, double b1, double b2, double pmin,
              double pmax, double dmin, double dmax) {
  return Prosumer{id, ConvexCurvePair::quadratic(a1, a2, b1, b2), pmin, pmax, dmin, dmax};
}

}  // namespace

TEST_CASE("net cost evaluates the quadratic pair") {
  MarketInstance inst = builtin_three_prosumer();
  CHECK(net_cost(inst.prosumers[0], 15.0, 15.0) == doctest::Approx(-6.255).epsilon(1e-12));
  CHECK(net_cost(inst.prosumers[2], 10.0, 10.0) == doctest::Approx(-1.44).epsilon(1e-12));
  for (const Prosumer& q : inst.prosumers) CHECK(net_cost(q, 0.0, 0.0) == 0.0);
}

TEST_CASE("self-sufficiency clips the unconstrained minimizer") {
  MarketInstance inst = builtin_three_prosumer();

  auto [x1, j1] = solve_self_sufficiency(inst.prosumers[0]);
  CHECK(x1 == 15.0);
  CHECK(j1 == doctest::Approx(-6.255).epsilon(1e-12));
  CHECK(net_cost(inst.prosumers[0], x1, x1) == j1);

  auto [x2, j2] = solve_self_sufficiency(inst.prosumers[1]);
  CHECK(x2 == doctest::Approx(10.295454545454547).epsilon(1e-13));
  CHECK(j2 == doctest::Approx(-2.331920454545455).epsilon(1e-13));

  Prosumer sym = quad(9, 1.0, 0.0, -1.0, 2.0, 0.0, 1.0, 0.0, 1.0);
  auto [xs, js] = solve_self_sufficiency(sym);
  CHECK(xs == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(js == doctest::Approx(-0.5).epsilon(1e-13));
}

TEST_CASE("empty self-sufficiency box is an assumption violation") {
  Prosumer p = quad(7, 0.01, 0.05, -0.01, 0.5, 0.0, 3.0, 5.0, 10.0);
  CHECK_THROWS_AS(solve_self_sufficiency(p), AssumptionViolation);
  try {
    solve_self_sufficiency(p);
  } catch (const AssumptionViolation& e) {
    CHECK(e.assumption() == "self-sufficiency feasibility");
    REQUIRE(e.prosumer_ids().size() == 1);
    CHECK(e.prosumer_ids()[0] == 7);
  }
}

TEST_CASE("marginal response inverts the derivatives and tags active bounds") {
  MarketInstance inst = builtin_three_prosumer();

  ResponsePoint r1 = marginal_response(inst.prosumers[0], 0.2803);
  CHECK(r1.p == doctest::Approx(8.076666666666666).epsilon(1e-13));
  CHECK(r1.d == 15.0);
  CHECK(r1.mu == 0.2803);
  CHECK(!r1.p_at_lower);
  CHECK(!r1.p_at_upper);
  CHECK(r1.d_at_upper);

  ResponsePoint r3 = marginal_response(inst.prosumers[2], 0.2803);
  CHECK(r3.p == doctest::Approx(10.195454545454545).epsilon(1e-13));
  CHECK(r3.d == 10.0);
  CHECK(r3.d_at_lower);

  for (const Prosumer& q : inst.prosumers) {
    ResponsePoint r = marginal_response(q, 1e9);
    CHECK(r.p == q.p_max);
    CHECK(r.d == q.d_min);
    CHECK(r.p_at_upper);
    CHECK(r.d_at_lower);
  }
}

TEST_CASE("surrogate best response solves the effective-price fixed point") {
  MarketInstance inst = builtin_three_prosumer();
  const Prosumer& p2 = inst.prosumers[1];

  SUBCASE("at the self-sufficiency marginal price the penalty vanishes") {
    auto [x2, j2] = solve_self_sufficiency(p2);
    double mu2 = p2.curves.f_prime(x2);
    CHECK(mu2 == doctest::Approx(0.21172727272727276).epsilon(1e-13));
    ResponsePoint r = solve_surrogate_best_response(p2, mu2, 100.0, 3);
    CHECK(r.p == doctest::Approx(x2).epsilon(1e-10));
    CHECK(r.d == doctest::Approx(x2).epsilon(1e-10));
    CHECK(r.mu == doctest::Approx(mu2).epsilon(1e-10));
  }

  SUBCASE("reference point at zero price") {
    ResponsePoint r = solve_surrogate_best_response(inst.prosumers[0], 0.0, 100.0, 3);
    CHECK(r.p == doctest::Approx(1.0571428571428576).epsilon(1e-12));
    CHECK(r.d == 15.0);
    CHECK(r.mu == doctest::Approx(0.06971428571428573).epsilon(1e-12));
    CHECK(r.d_at_upper);
  }

  SUBCASE("large population collapses to the marginal response") {
    ResponsePoint r = solve_surrogate_best_response(inst.prosumers[0], 0.3, 100.0, 1000000);
    ResponsePoint m = marginal_response(inst.prosumers[0], 0.3);
    CHECK(std::abs(r.p - m.p) <= 1e-4);
    CHECK(std::abs(r.d - m.d) <= 1e-4);
  }

  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(solve_surrogate_best_response(p2, 0.0, 0.0, 3), ParameterError);
    CHECK_THROWS_AS(solve_surrogate_best_response(p2, 0.0, 100.0, 1), ParameterError);
  }
}

TEST_CASE("stationarity and complementary slackness hold at surrogate points") {
  MarketInstance inst = builtin_three_prosumer();
  for (const Prosumer& q : inst.prosumers) {
    for (double lam : {0.0, 0.28, 0.5}) {
      ResponsePoint r = solve_surrogate_best_response(q, lam, 100.0, 3);
      if (r.p_at_lower) CHECK(q.curves.f_prime(r.p) >= r.mu - 1e-9);
      if (r.p_at_upper) CHECK(q.curves.f_prime(r.p) <= r.mu + 1e-9);
      if (!r.p_at_lower && !r.p_at_upper)
        CHECK(std::abs(q.curves.f_prime(r.p) - r.mu) <= 1e-9);
      if (r.d_at_lower) CHECK(q.curves.u_prime(r.d) <= r.mu + 1e-9);
      if (r.d_at_upper) CHECK(q.curves.u_prime(r.d) >= r.mu - 1e-9);
      if (!r.d_at_lower && !r.d_at_upper)
        CHECK(std::abs(q.curves.u_prime(r.d) - r.mu) <= 1e-9);
      CHECK(std::abs(r.mu - lam - (r.d - r.p) / (100.0 * 2)) <= 1e-9);
    }
  }
}

TEST_CASE("responses are monotone and Lipschitz in the price") {
  MarketInstance inst = builtin_three_prosumer();
  std::mt19937_64 gen(11);
  for (const Prosumer& q : inst.prosumers) {
    double gamma = max_response_slope(q);
    for (int k = 0; k < 100; ++k) {
      double x = uniform(gen, -1.0, 2.0);
      double y = uniform(gen, -1.0, 2.0);
      if (x > y) std::swap(x, y);
      double fx = q.curves.production_response(x, q.p_min, q.p_max);
      double fy = q.curves.production_response(y, q.p_min, q.p_max);
      double ux = q.curves.demand_response(x, q.d_min, q.d_max);
      double uy = q.curves.demand_response(y, q.d_min, q.d_max);
      CHECK(fx <= fy + 1e-12);
      CHECK(ux >= uy - 1e-12);
      CHECK(std::abs(fy - fx) <= gamma * (y - x) + 1e-9);
      CHECK(std::abs(ux - uy) <= gamma * (y - x) + 1e-9);
    }
  }
}

TEST_CASE("self-sufficiency point is the global minimum on the diagonal") {
  MarketInstance inst = builtin_three_prosumer();
  std::mt19937_64 gen(12);
  for (const Prosumer& q : inst.prosumers) {
    auto [x, j] = solve_self_sufficiency(q);
    double lo = std::max(q.p_min, q.d_min);
    double hi = std::min(q.p_max, q.d_max);
    for (int k = 0; k < 100; ++k) {
      double y = uniform(gen, lo, hi);
      CHECK(net_cost(q, y, y) >= j - 1e-12);
    }
  }
}

TEST_CASE("market sensitivity floor from the response slopes") {
  MarketInstance inst = builtin_three_prosumer();
  CHECK(min_market_sensitivity(inst.prosumers, 3) == 62.5);
  CHECK(min_market_sensitivity(inst.prosumers, 2) == 0.0);

  std::vector<Prosumer> one = {quad(1, 0.01, 0.05, -0.01, 0.5, 0.0, 30.0, 5.0, 20.0)};
  CHECK(min_market_sensitivity(one, 50) == doctest::Approx(97.95918367346938).epsilon(1e-13));
  CHECK_THROWS_AS(min_market_sensitivity(one, 1), ParameterError);
}

TEST_CASE("general curves reproduce the quadratic closed forms") {
  auto f = CurveTriple{[](double x) { return 0.008 * x * x + 0.047 * x; },
                       [](double x) { return 0.016 * x + 0.047; },
                       [](double) { return 0.016; }};
  auto u = CurveTriple{[](double x) { return -0.014 * x * x + 0.5 * x; },
                       [](double x) { return -0.028 * x + 0.5; },
                       [](double) { return -0.028; }};
  Prosumer gen{2, ConvexCurvePair::general(f, u), 0.0, 25.0, 7.0, 18.0};
  Prosumer ref = quad(2, 0.008, 0.047, -0.014, 0.5, 0.0, 25.0, 7.0, 18.0);
  validate_prosumer(gen);

  for (double mu : {-0.2, 0.1, 0.2803, 0.6, 2.0}) {
    ResponsePoint a = marginal_response(gen, mu);
    ResponsePoint b = marginal_response(ref, mu);
    CHECK(a.p == doctest::Approx(b.p).epsilon(1e-9));
    CHECK(a.d == doctest::Approx(b.d).epsilon(1e-9));
  }
  ResponsePoint a = solve_surrogate_best_response(gen, 0.1, 100.0, 3);
  ResponsePoint b = solve_surrogate_best_response(ref, 0.1, 100.0, 3);
  CHECK(a.p == doctest::Approx(b.p).epsilon(1e-8));
  CHECK(a.d == doctest::Approx(b.d).epsilon(1e-8));

  auto [xg, jg] = solve_self_sufficiency(gen);
  auto [xr, jr] = solve_self_sufficiency(ref);
  CHECK(xg == doctest::Approx(xr).epsilon(1e-9));
  CHECK(jg == doctest::Approx(jr).epsilon(1e-9));
  CHECK(max_response_slope(gen) == doctest::Approx(max_response_slope(ref)).epsilon(1e-6));
}

TEST_CASE("curve and box validation rejects bad inputs") {
  CHECK_THROWS_AS(ConvexCurvePair::quadratic(0.0, 0.1, -0.01, 0.5), ParameterError);
  CHECK_THROWS_AS(ConvexCurvePair::quadratic(0.01, 0.1, 0.01, 0.5), ParameterError);

  Prosumer inverted = quad(1, 0.01, 0.1, -0.01, 0.5, 5.0, 2.0, 0.0, 10.0);
  CHECK_THROWS_AS(validate_prosumer(inverted), ParameterError);

  auto concave_f = CurveTriple{[](double x) { return -x * x; },
                               [](double x) { return -2 * x; },
                               [](double) { return -2.0; }};
  auto good_u = CurveTriple{[](double x) { return -x * x + x; },
                            [](double x) { return -2 * x + 1; },
                            [](double) { return -2.0; }};
  Prosumer bad{3, ConvexCurvePair::general(concave_f, good_u), 0.0, 5.0, 0.0, 5.0};
  CHECK_THROWS_AS(validate_prosumer(bad), ParameterError);
}

TEST_CASE("scaled curves multiply both polynomials") {
  MarketInstance inst = builtin_three_prosumer();
  const Prosumer& q = inst.prosumers[0];
  ConvexCurvePair s = q.curves.scaled(1.1);
  for (double x : {0.0, 3.7, 12.0}) {
    CHECK(s.f(x) == doctest::Approx(1.1 * q.curves.f(x)).epsilon(1e-13));
    CHECK(s.u(x) == doctest::Approx(1.1 * q.curves.u(x)).epsilon(1e-13));
  }
  CHECK(s.a1() == doctest::Approx(0.015 * 1.1).epsilon(1e-13));
  CHECK_THROWS_AS(q.curves.scaled(0.0), ParameterError);
}
