#include "esm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "esm/random.hpp"

namespace esm {

namespace {

// Grid points lo, lo+step, ..., plus the box's upper edge when the step does
// not land on it exactly.
std::vector<double> axis_grid(double lo, double hi, double step, int max_points) {
  int n = static_cast<int>(std::floor((hi - lo) / step + 1e-12)) + 1;
  if (n > max_points)
    throw ParameterError("grid axis needs " + std::to_string(n) + " points, limit is " +
                         std::to_string(max_points));
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = lo + step * k;
  if (g.back() < hi - 1e-12) g.push_back(hi);
  return g;
}

}  // namespace

GridResult grid_best_response(const Prosumer& prosumer, double lambda, double a, int I,
                              const GridSpec& grid) {
  if (!(grid.step > 0)) throw ParameterError("grid step must be positive");
  if (!(a > 0)) throw ParameterError("market sensitivity must be positive");
  if (I < 2) throw ParameterError("surrogate objective needs at least two prosumers");
  const double A = a * (I - 1);
  auto pgrid = axis_grid(prosumer.p_min, prosumer.p_max, grid.step, grid.max_points_per_axis);
  auto dgrid = axis_grid(prosumer.d_min, prosumer.d_max, grid.step, grid.max_points_per_axis);

  std::vector<double> ucol(dgrid.size());
  for (size_t j = 0; j < dgrid.size(); ++j) ucol[j] = -prosumer.curves.u(dgrid[j]);

  GridResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (double p : pgrid) {
    const double fp = prosumer.curves.f(p);
    for (size_t j = 0; j < dgrid.size(); ++j) {
      const double diff = dgrid[j] - p;
      const double obj = fp + ucol[j] + diff * diff / (2 * A) + lambda * diff;
      if (obj < best.objective) {
        best.objective = obj;
        best.p = p;
        best.d = dgrid[j];
      }
    }
  }
  return best;
}

PerturbationResult perturbation_optimality_check(const MarketInstance& instance,
                                                 const EquilibriumSolution& solution,
                                                 int n_samples, double radius,
                                                 std::uint64_t seed) {
  const int I = instance.size();
  if (solution.p.size() != I || solution.d.size() != I)
    throw ParameterError("solution size does not match instance");
  if (solution.mode == SolutionMode::self_sufficiency)
    throw ParameterError("perturbation check applies to market solutions only");
  if (radius < 0) throw ParameterError("perturbation radius must be nonnegative");

  double sp = 0, sd = 0;
  for (int i = 0; i < I; ++i) {
    const auto& q = instance.prosumers[i];
    if (solution.p[i] < q.p_min - 1e-9 || solution.p[i] > q.p_max + 1e-9 ||
        solution.d[i] < q.d_min - 1e-9 || solution.d[i] > q.d_max + 1e-9)
      throw ParameterError("input solution violates a capacity box");
    sp += solution.p[i];
    sd += solution.d[i];
  }
  if (std::abs(sp - sd) > kBalanceTol)
    throw ParameterError("input solution is not balanced");

  const bool social = solution.mode == SolutionMode::social;
  auto objective = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& d) {
    return social ? social_objective(instance, p, d) : penalized_objective(instance, p, d);
  };

  std::mt19937_64 gen(seed);
  PerturbationResult res;
  res.tol = 1e-6 + std::abs(solution.dual) * radius * 1e-3;
  const double base = objective(solution.p, solution.d);
  Eigen::VectorXd dp(I), dd(I), p2(I), d2(I);
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < I; ++i) dp[i] = (2 * canonical(gen) - 1) * radius;
    for (int i = 0; i < I; ++i) dd[i] = (2 * canonical(gen) - 1) * radius;
    double sdp = 0, sdd = 0;
    for (int i = 0; i < I; ++i) {
      sdp += dp[i];
      sdd += dd[i];
    }
    const double c = (sdp - sdd) / (2 * I);
    double s2p = 0, s2d = 0;
    for (int i = 0; i < I; ++i) {
      const auto& q = instance.prosumers[i];
      p2[i] = std::min(std::max(solution.p[i] + dp[i] - c, q.p_min), q.p_max);
      d2[i] = std::min(std::max(solution.d[i] + dd[i] + c, q.d_min), q.d_max);
      s2p += p2[i];
      s2d += d2[i];
    }
    if (std::abs(s2p - s2d) > radius * 1e-3) continue;
    res.kept += 1;
    res.worst_improvement = std::max(res.worst_improvement, base - objective(p2, d2));
  }
  res.pass = res.worst_improvement <= res.tol;
  return res;
}

}  // namespace esm
