#pragma once

#include <optional>
#include <vector>

#include "mnl_lab/utilities.hpp"

namespace mnl_lab {

// Upper end of the revenue bracket: exp(mu) * (0.6 + ln K) / l0, where mu
// bounds the utility intercepts h_i(0). The optimal per-round revenue never
// exceeds this level, so the fixed-point bisection can start on [0, P0].
double price_bound(double mu, int assort_cap, double l0);

// Best contribution of one item at revenue level b, together with the price
// achieving it.
struct ItemValue {
  double value = 0.0;
  double price = 0.0;
};

// Solutions of the per-item price condition p + 1/h'(p) = b.
//
// For an affine curve h = alpha - beta p there is exactly one: p = b + 1/beta
// (none when beta <= 0, the curve then never crosses the condition).
std::vector<double> candidate_prices_linear(const LinearUtility& model, double b);

// For an optimistic curve the condition on the raw branch reads
// h~'(p) = 1/(b - p), with every solution in (b, b + 1/l0]. The solver
// locates the stationary points of z(p) = h~'(p) - 1/(b - p) as real roots
// of Q(p)^3 = (a3 a5 - a4^2)^2 (b - p)^4 (companion-matrix eigenvalues),
// then bisects each sign change of z between consecutive stationary points.
// Raw-branch solutions are kept only below the knee p0; the linear tail
// contributes p = b + 1/l0 whenever that lands past the knee. `p_upper`
// scales the scan interval and must match the bracket the level b came from.
//
// Throws DegenerateBonusError when a3 a5 - a4^2 ~ 0: the bonus then collapses
// to |affine| and the stationary-point polynomial degenerates.
std::vector<double> candidate_prices_conf(const ConfUtility& model, double b, double p_upper);

// Dispatches on the model and resolves the degenerate-bonus case by treating
// the curve piecewise affine (slopes -a2 -+ sqrt(a5) around the kink a4/a5),
// one candidate per piece that actually contains it.
std::vector<double> candidate_prices(const UtilityModel& model, double b, double p_upper);

// Maximizes f(p) = -exp(h(p)) / h'(p) over the candidates at level b.
// Empty when the item admits no candidate price.
std::optional<ItemValue> item_value(const UtilityModel& model, double b, double p_upper);

// Positions of the at-most-k largest strictly positive values, preferring
// the lower position on ties, returned in ascending position order.
std::vector<int> top_k_values(const std::vector<double>& values, int k);

// One catalog item admitted to the optimization (items whose optimistic
// curve cannot be built are simply left out).
struct FixedPointItem {
  int index = 0;  // catalog index, echoed back in the result
  UtilityModel model;
};

struct FixedPointConfig {
  double epsilon = 1e-6;  // final bracket width on the revenue level
  double p_upper = 0.0;   // initial bracket [0, p_upper]; see price_bound
};

struct OptimizationResult {
  double revenue = 0.0;           // midpoint of the final bracket
  std::vector<int> assortment;    // chosen catalog indices, ascending
  std::vector<double> prices;     // aligned with assortment
  int iterations = 0;
  double residual = 0.0;          // |revenue - sum of winning item values|
};

// Solves max_{|S| <= assort_cap, p} expected revenue for one round by
// bisecting the revenue level B on [0, p_upper]: the best achievable sum of
// item values at level B falls below B exactly when B overshoots the fixed
// point. Runs ceil(log2(p_upper / epsilon)) + 8 iterations, then extracts
// the assortment and prices at the bracket midpoint.
OptimizationResult fixed_point_solve(const std::vector<FixedPointItem>& items, int assort_cap,
                                     const FixedPointConfig& config);

}  // namespace mnl_lab
