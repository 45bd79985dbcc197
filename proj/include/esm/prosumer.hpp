#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "esm/errors.hpp"

namespace esm {

// Default tolerance on price-like scalars exposed through public interfaces.
inline constexpr double kPriceTol = 1e-9;
// Tolerance the solvers pass to their internal scalar bisections. Response
// coordinates inherit roughly (1 / curvature) times the price tolerance, so
// the internal value is kept well below every test budget.
inline constexpr double kSurrogateTol = 1e-13;
inline constexpr double kBisectionTol = 1e-12;
// Default balance tolerance on aggregate energy quantities.
inline constexpr double kBalanceTol = 1e-7;

// One side of a general curve: value plus first and second derivatives.
struct CurveTriple {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<double(double)> second;
};

// Production cost f and consumption utility u of one prosumer. The built-in
// form is quadratic, f(p) = a1 p^2 + a2 p with a1 > 0 and
// u(d) = b1 d^2 + b2 d with b1 < 0. Arbitrary strictly convex f and strictly
// concave u plug in through CurveTriple; their inverse derivatives are then
// solved by bisection instead of the closed form.
class ConvexCurvePair {
 public:
  static ConvexCurvePair quadratic(double a1, double a2, double b1, double b2);
  static ConvexCurvePair general(CurveTriple f, CurveTriple u);

  double f(double p) const;
  double f_prime(double p) const;
  double f_second(double p) const;
  double u(double d) const;
  double u_prime(double d) const;
  double u_second(double d) const;

  bool is_quadratic() const { return quadratic_; }
  double a1() const { return a1_; }
  double a2() const { return a2_; }
  double b1() const { return b1_; }
  double b2() const { return b2_; }

  // Solves f'(x) = mu (respectively u'(x) = mu) and clips the result to
  // [lo, hi]. Monotone nondecreasing (nonincreasing) in mu.
  double production_response(double mu, double lo, double hi) const;
  double demand_response(double mu, double lo, double hi) const;

  // The whole pair scaled by s > 0, as submitted by a misreporting prosumer.
  ConvexCurvePair scaled(double s) const;

 private:
  ConvexCurvePair() = default;

  bool quadratic_ = true;
  double a1_ = 0, a2_ = 0, b1_ = 0, b2_ = 0;
  CurveTriple fgen_;
  CurveTriple ugen_;
};

struct Prosumer {
  int id;
  ConvexCurvePair curves;
  double p_min, p_max;
  double d_min, d_max;
};

// Response of one prosumer to an effective price, with active-bound tags.
struct ResponsePoint {
  double p = 0;
  double d = 0;
  double mu = 0;
  bool p_at_lower = false;
  bool p_at_upper = false;
  bool d_at_lower = false;
  bool d_at_upper = false;
};

// Checks box ordering and curve convexity. Quadratic coefficients are checked
// exactly; general curves are sampled at 101 points per axis over the box and
// must keep f'' > 0 and u'' < 0 throughout.
void validate_prosumer(const Prosumer& prosumer);

double net_cost(const Prosumer& prosumer, double p, double d);

// Minimizes f(x) - u(x) over the intersection box
// [max(p_min, d_min), min(p_max, d_max)]; unique by strict convexity.
// Returns the minimizer and the standalone cost at it.
// Throws AssumptionViolation when the intersection box is empty.
std::pair<double, double> solve_self_sufficiency(const Prosumer& prosumer,
                                                 double tol = kPriceTol);

// Price-taking response: p = argmin f(p) - price * p, d = argmax u(d) - price * d,
// both clipped to the box.
ResponsePoint marginal_response(const Prosumer& prosumer, double price);

// Minimizes f(p) - u(d) + (d - p)^2 / (2 a (I - 1)) + lambda (d - p) over the
// box, via the effective-price fixed point
//   mu = lambda + (demand_response(mu) - production_response(mu)) / (a (I - 1)).
// The residual of that equation is strictly increasing in mu, so a scalar
// bisection finds the unique root.
ResponsePoint solve_surrogate_best_response(const Prosumer& prosumer, double lambda,
                                            double a, int I,
                                            double tol = kSurrogateTol);

// Largest slope of this prosumer's marginal responses: sup over the box of
// {1/f'', -1/u''} (closed form for quadratics, 101-point sampling otherwise).
double max_response_slope(const Prosumer& prosumer);

// Smallest market sensitivity with guaranteed bidding convergence for a
// population of I prosumers drawn from this list:
//   (2 I - 4) / (I - 1) * sup over prosumers of max_response_slope.
double min_market_sensitivity(const std::vector<Prosumer>& prosumers, int I);

}  // namespace esm
