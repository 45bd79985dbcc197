#include "esm/prosumer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace esm {

namespace {

double clip(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Increasing-derivative inverse on [lo, hi] with saturation at the ends.
double invert_increasing(const std::function<double(double)>& deriv, double mu,
                         double lo, double hi) {
  if (deriv(lo) >= mu) return lo;
  if (deriv(hi) <= mu) return hi;
  for (int k = 0; k < 200; ++k) {
    double mid = 0.5 * (lo + hi);
    if (deriv(mid) < mu)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= kBisectionTol) break;
  }
  return 0.5 * (lo + hi);
}

double invert_decreasing(const std::function<double(double)>& deriv, double mu,
                         double lo, double hi) {
  if (deriv(lo) <= mu) return lo;
  if (deriv(hi) >= mu) return hi;
  for (int k = 0; k < 200; ++k) {
    double mid = 0.5 * (lo + hi);
    if (deriv(mid) > mu)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= kBisectionTol) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ConvexCurvePair ConvexCurvePair::quadratic(double a1, double a2, double b1, double b2) {
  if (!(a1 > 0))
    throw ParameterError("production curvature must be positive, got " + std::to_string(a1));
  if (!(b1 < 0))
    throw ParameterError("consumption curvature must be negative, got " + std::to_string(b1));
  ConvexCurvePair c;
  c.quadratic_ = true;
  c.a1_ = a1;
  c.a2_ = a2;
  c.b1_ = b1;
  c.b2_ = b2;
  return c;
}

ConvexCurvePair ConvexCurvePair::general(CurveTriple f, CurveTriple u) {
  if (!f.value || !f.deriv || !f.second || !u.value || !u.deriv || !u.second)
    throw ParameterError("general curves need value, derivative, and second derivative");
  ConvexCurvePair c;
  c.quadratic_ = false;
  c.fgen_ = std::move(f);
  c.ugen_ = std::move(u);
  return c;
}

double ConvexCurvePair::f(double p) const {
  return quadratic_ ? a1_ * p * p + a2_ * p : fgen_.value(p);
}

double ConvexCurvePair::f_prime(double p) const {
  return quadratic_ ? 2 * a1_ * p + a2_ : fgen_.deriv(p);
}

double ConvexCurvePair::f_second(double p) const {
  return quadratic_ ? 2 * a1_ : fgen_.second(p);
}

double ConvexCurvePair::u(double d) const {
  return quadratic_ ? b1_ * d * d + b2_ * d : ugen_.value(d);
}

double ConvexCurvePair::u_prime(double d) const {
  return quadratic_ ? 2 * b1_ * d + b2_ : ugen_.deriv(d);
}

double ConvexCurvePair::u_second(double d) const {
  return quadratic_ ? 2 * b1_ : ugen_.second(d);
}

double ConvexCurvePair::production_response(double mu, double lo, double hi) const {
  if (quadratic_) return clip((mu - a2_) / (2 * a1_), lo, hi);
  return invert_increasing(fgen_.deriv, mu, lo, hi);
}

double ConvexCurvePair::demand_response(double mu, double lo, double hi) const {
  if (quadratic_) return clip((mu - b2_) / (2 * b1_), lo, hi);
  return invert_decreasing(ugen_.deriv, mu, lo, hi);
}

ConvexCurvePair ConvexCurvePair::scaled(double s) const {
  if (!(s > 0)) throw ParameterError("curve scale must be positive, got " + std::to_string(s));
  if (quadratic_) return quadratic(a1_ * s, a2_ * s, b1_ * s, b2_ * s);
  CurveTriple f{[g = fgen_, s](double x) { return s * g.value(x); },
                [g = fgen_, s](double x) { return s * g.deriv(x); },
                [g = fgen_, s](double x) { return s * g.second(x); }};
  CurveTriple u{[g = ugen_, s](double x) { return s * g.value(x); },
                [g = ugen_, s](double x) { return s * g.deriv(x); },
                [g = ugen_, s](double x) { return s * g.second(x); }};
  return general(std::move(f), std::move(u));
}

void validate_prosumer(const Prosumer& prosumer) {
  const auto id = std::to_string(prosumer.id);
  if (!(prosumer.p_min <= prosumer.p_max))
    throw ParameterError("production box inverted for prosumer " + id);
  if (!(prosumer.d_min <= prosumer.d_max))
    throw ParameterError("demand box inverted for prosumer " + id);
  if (prosumer.curves.is_quadratic()) return;  // curvature checked at construction
  for (int k = 0; k <= 100; ++k) {
    double t = k / 100.0;
    double p = prosumer.p_min + t * (prosumer.p_max - prosumer.p_min);
    double d = prosumer.d_min + t * (prosumer.d_max - prosumer.d_min);
    if (!(prosumer.curves.f_second(p) > 0))
      throw ParameterError("production cost not strictly convex for prosumer " + id);
    if (!(prosumer.curves.u_second(d) < 0))
      throw ParameterError("consumption utility not strictly concave for prosumer " + id);
  }
}

double net_cost(const Prosumer& prosumer, double p, double d) {
  return prosumer.curves.f(p) - prosumer.curves.u(d);
}

std::pair<double, double> solve_self_sufficiency(const Prosumer& prosumer, double tol) {
  double lo = std::max(prosumer.p_min, prosumer.d_min);
  double hi = std::min(prosumer.p_max, prosumer.d_max);
  if (lo > hi)
    throw AssumptionViolation("self-sufficiency feasibility", {prosumer.id},
                              "self-sufficiency box empty for prosumer " +
                                  std::to_string(prosumer.id));
  double x;
  if (prosumer.curves.is_quadratic()) {
    const auto& c = prosumer.curves;
    x = (c.b2() - c.a2()) / (2 * (c.a1() - c.b1()));
    x = clip(x, lo, hi);
  } else {
    // f' - u' is strictly increasing; its root is the unconstrained minimum.
    auto resid = [&](double y) {
      return prosumer.curves.f_prime(y) - prosumer.curves.u_prime(y);
    };
    x = invert_increasing(resid, 0.0, lo, hi);
    (void)tol;
  }
  return {x, net_cost(prosumer, x, x)};
}

ResponsePoint marginal_response(const Prosumer& prosumer, double price) {
  ResponsePoint r;
  r.mu = price;
  r.p = prosumer.curves.production_response(price, prosumer.p_min, prosumer.p_max);
  r.d = prosumer.curves.demand_response(price, prosumer.d_min, prosumer.d_max);
  r.p_at_lower = r.p == prosumer.p_min;
  r.p_at_upper = r.p == prosumer.p_max;
  r.d_at_lower = r.d == prosumer.d_min;
  r.d_at_upper = r.d == prosumer.d_max;
  return r;
}

ResponsePoint solve_surrogate_best_response(const Prosumer& prosumer, double lambda,
                                            double a, int I, double tol) {
  if (!(a > 0)) throw ParameterError("market sensitivity must be positive");
  if (I < 2) throw ParameterError("surrogate best response needs at least two prosumers");
  const double A = a * (I - 1);
  auto g = [&](double mu) {
    double pd = prosumer.curves.demand_response(mu, prosumer.d_min, prosumer.d_max) -
                prosumer.curves.production_response(mu, prosumer.p_min, prosumer.p_max);
    return mu - lambda - pd / A;
  };
  double lo = lambda - (prosumer.p_max - prosumer.d_min) / A - 1.0;
  double hi = lambda + (prosumer.d_max - prosumer.p_min) / A + 1.0;
  while (g(lo) > 0) lo -= (hi - lo);
  while (g(hi) < 0) hi += (hi - lo);
  for (int k = 0; k < 200; ++k) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) < 0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= tol) break;
  }
  double mu = 0.5 * (lo + hi);
  ResponsePoint r;
  r.mu = mu;
  r.p = prosumer.curves.production_response(mu, prosumer.p_min, prosumer.p_max);
  r.d = prosumer.curves.demand_response(mu, prosumer.d_min, prosumer.d_max);
  r.p_at_lower = r.p == prosumer.p_min;
  r.p_at_upper = r.p == prosumer.p_max;
  r.d_at_lower = r.d == prosumer.d_min;
  r.d_at_upper = r.d == prosumer.d_max;
  return r;
}

double max_response_slope(const Prosumer& prosumer) {
  const auto& c = prosumer.curves;
  if (c.is_quadratic())
    return std::max(1.0 / (2 * c.a1()), 1.0 / (2 * std::abs(c.b1())));
  double worst = 0.0;
  for (int k = 0; k <= 100; ++k) {
    double t = k / 100.0;
    double p = prosumer.p_min + t * (prosumer.p_max - prosumer.p_min);
    double d = prosumer.d_min + t * (prosumer.d_max - prosumer.d_min);
    worst = std::max(worst, 1.0 / c.f_second(p));
    worst = std::max(worst, 1.0 / -c.u_second(d));
  }
  return worst;
}

double min_market_sensitivity(const std::vector<Prosumer>& prosumers, int I) {
  if (prosumers.empty()) throw ParameterError("need at least one prosumer");
  if (I < 2) throw ParameterError("market sensitivity bound needs at least two prosumers");
  double sup = 0.0;
  for (const auto& q : prosumers) sup = std::max(sup, max_response_slope(q));
  return (2.0 * I - 4.0) / (I - 1.0) * sup;
}

}  // namespace esm
