#include "mnl_lab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "mnl_lab/errors.hpp"

namespace mnl_lab {

namespace {

constexpr double kRootResidualTol = 1e-8;   // accept p only if |p + 1/h'(p) - b| stays below
constexpr double kEndpointZTol = 1e-9;      // accept a bracket endpoint as a touching root
constexpr double kBisectRelTol = 1e-13;     // relative bracket width for the inner bisection
constexpr int kBisectMaxIter = 200;

// Refines one sign change on [lo, hi] (f(lo) and f(hi) of opposite signs);
// fdf(x) returns {f(x), f'(x)}. Newton steps from the latest iterate are
// accepted only while they stay strictly inside the current bracket; anything
// else — a step out of range, a non-finite proposal, or a stall on an
// endpoint — falls back to the bracket midpoint, so progress never degrades
// below plain bisection.
template <typename Fdf>
double bracketed_newton_root(const Fdf& fdf, double lo, double hi, double f_lo) {
  double x = 0.5 * (lo + hi);
  auto [f_x, df_x] = fdf(x);
  for (int iter = 0; iter < kBisectMaxIter; ++iter) {
    if (f_x == 0.0) {
      return x;
    }
    if ((f_lo < 0.0) == (f_x < 0.0)) {
      lo = x;
      f_lo = f_x;
    } else {
      hi = x;
    }
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= kBisectRelTol * (1.0 + std::abs(mid))) {
      return mid;
    }
    double next = x - f_x / df_x;
    const bool newton_ok = next > lo && next < hi;
    if (!newton_ok) {
      next = mid;
    } else if (std::abs(next - x) <= kBisectRelTol * (1.0 + std::abs(next))) {
      return next;
    }
    x = next;
    std::tie(f_x, df_x) = fdf(x);
  }
  return 0.5 * (lo + hi);
}

// Degenerate-bonus fallback: the radicand collapses to a5 (p - a4/a5)^2, so
// sqrt of it is |affine| and the curve is affine on each side of the kink.
// Each piece with positive effective slope magnitude contributes its own
// p = b + 1/beta, kept only when it actually lies on that piece and below
// the knee. The kink itself is not a smooth solution of the price condition
// and is skipped. The tightened tail contributes p = b + 1/l0 past the knee.
std::vector<double> candidate_prices_degenerate(const ConfUtility& m, double b) {
  std::vector<double> out;
  const double root_a5 = std::sqrt(std::max(0.0, m.a5));
  if (root_a5 == 0.0) {
    // Constant bonus: the whole raw branch is affine with slope -a2.
    if (m.a2 > 0.0) {
      const double p = b + 1.0 / m.a2;
      if (p < m.p0) {
        out.push_back(p);
      }
    }
  } else {
    const double kink = m.a4 / m.a5;
    const double beta_left = m.a2 + root_a5;
    if (beta_left > 0.0) {
      const double p = b + 1.0 / beta_left;
      if (p < kink && p < m.p0) {
        out.push_back(p);
      }
    }
    const double beta_right = m.a2 - root_a5;
    if (beta_right > 0.0) {
      const double p = b + 1.0 / beta_right;
      if (p > kink && p < m.p0) {
        out.push_back(p);
      }
    }
  }
  if (m.l0 > 0.0) {
    const double p_tail = b + 1.0 / m.l0;
    if (p_tail >= m.p0) {
      out.push_back(p_tail);
    }
  }
  return out;
}

double price_residual(const UtilityModel& model, double p, double b) {
  const double slope = util_slope(model, p);
  if (slope >= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return std::abs(p + 1.0 / slope - b);
}

}  // namespace

double price_bound(double mu, int assort_cap, double l0) {
  if (assort_cap < 1) {
    throw ConfigError("price_bound: assort_cap must be at least 1");
  }
  if (!(l0 > 0.0)) {
    throw ConfigError("price_bound: l0 must be positive");
  }
  return std::exp(mu) * (0.6 + std::log(static_cast<double>(assort_cap))) / l0;
}

std::vector<double> candidate_prices_linear(const LinearUtility& model, double b) {
  if (!(model.beta > 0.0)) {
    return {};
  }
  return {b + 1.0 / model.beta};
}

std::vector<double> candidate_prices_conf(const ConfUtility& model, double b, double p_upper) {
  const double det = model.a3 * model.a5 - model.a4 * model.a4;
  const double eps_degen = 1e-12 * (1.0 + model.a3) * (1.0 + model.a5);
  if (det <= eps_degen) {
    throw DegenerateBonusError("optimistic bonus radicand is a perfect square");
  }
  if (!(model.l0 > 0.0)) {
    throw ConfigError("candidate_prices_conf: model.l0 must be positive");
  }

  const double slope_span = model.a2 + std::sqrt(std::max(0.0, model.a5)) + 1.0;
  const double delta = std::min(1e-9 * p_upper, 0.5 / slope_span);
  const double left = b + delta;
  const double right = b + 1.0 / model.l0 + p_upper;

  // Stationary points of z(p) = h~'(p) - 1/(b - p) satisfy
  // det (p - b)^2 = Q(p)^{3/2} with Q = a3 - 2 a4 p + a5 p^2. Both sides are
  // strictly positive beyond b (det > 0 forces a5 > 0 and min Q = det / a5),
  // so in logs they vanish exactly where
  //   w(p) = ln det + 2 ln(p - b) - 1.5 ln Q(p)
  // does. w' = 0 reduces to the quadratic
  //   a5 p^2 + (a4 - 3 a5 b) p + (3 a4 b - 2 a3) = 0,
  // so w has at most two interior stationary points; between consecutive grid
  // points w is monotone and each sign change brackets one root of w.
  // Q never drops below its vertex value det / a5, so clamping there only
  // guards the logs against roundoff.
  const double q_floor = 0.5 * det / model.a5;
  const auto w_fdf = [&model, b, q_floor, det](double p) {
    const double q =
        std::max(model.a3 - 2.0 * model.a4 * p + model.a5 * p * p, q_floor);
    const double f = std::log(det) + 2.0 * std::log(p - b) - 1.5 * std::log(q);
    const double df = 2.0 / (p - b) - 3.0 * (model.a5 * p - model.a4) / q;
    return std::pair(f, df);
  };
  std::vector<double> grid = {left};
  {
    const double qa = model.a5;
    const double qb = model.a4 - 3.0 * model.a5 * b;
    const double qc = 3.0 * model.a4 * b - 2.0 * model.a3;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc > 0.0) {
      const double qq = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      for (const double r : {qq / qa, qq != 0.0 ? qc / qq : qq / qa}) {
        if (r > left && r < right) {
          grid.push_back(r);
        }
      }
    }
  }
  grid.push_back(right);
  std::sort(grid.begin(), grid.end());

  // z is monotone between consecutive stationary points, so each sign change
  // of z across the partition brackets exactly one solution.
  std::vector<double> points = {left};
  std::vector<double> w_vals(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    w_vals[k] = w_fdf(grid[k]).first;
    if (w_vals[k] == 0.0 && grid[k] > left && grid[k] < right) {
      points.push_back(grid[k]);
    }
  }
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if ((w_vals[k] < 0.0) != (w_vals[k + 1] < 0.0) && w_vals[k] != 0.0 && w_vals[k + 1] != 0.0) {
      points.push_back(bracketed_newton_root(w_fdf, grid[k], grid[k + 1], w_vals[k]));
    }
  }
  points.push_back(right);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end(),
                           [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x)); }),
               points.end());

  const auto z = [&model, b](double p) { return model.raw_slope(p) - 1.0 / (b - p); };
  // z and its derivative in one evaluation (they share the radicand and its
  // square root): the raw curve's curvature is det / Q^{3/2}, with Q strictly
  // positive here because det > 0 forces a5 > 0 and min Q = det / a5, and the
  // hyperbola contributes -1/(b - p)^2.
  const auto z_fdf = [&model, b, det](double p) {
    const double q = std::max(0.0, model.a3 - 2.0 * model.a4 * p + model.a5 * p * p);
    const double root = std::sqrt(q);
    const double diff = b - p;
    const double f = -model.a2 + (model.a5 * p - model.a4) / root - 1.0 / diff;
    const double df = det / (q * root) - 1.0 / (diff * diff);
    return std::pair(f, df);
  };
  std::vector<double> roots;
  std::vector<double> z_vals(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    z_vals[k] = z(points[k]);
    if (std::abs(z_vals[k]) <= kEndpointZTol) {
      roots.push_back(points[k]);
    }
  }
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    if ((z_vals[k] < 0.0) != (z_vals[k + 1] < 0.0) && z_vals[k] != 0.0 && z_vals[k + 1] != 0.0) {
      roots.push_back(bracketed_newton_root(z_fdf, points[k], points[k + 1], z_vals[k]));
    }
  }

  std::vector<double> out;
  for (double p : roots) {
    if (p < model.p0) {
      out.push_back(p);
    }
  }
  const double p_tail = b + 1.0 / model.l0;
  if (p_tail > model.p0) {
    out.push_back(p_tail);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> candidate_prices(const UtilityModel& model, double b, double p_upper) {
  std::vector<double> raw;
  if (const auto* lin = std::get_if<LinearUtility>(&model)) {
    raw = candidate_prices_linear(*lin, b);
  } else {
    const auto& conf = std::get<ConfUtility>(model);
    try {
      raw = candidate_prices_conf(conf, b, p_upper);
    } catch (const DegenerateBonusError&) {
      raw = candidate_prices_degenerate(conf, b);
    }
  }
  std::vector<double> out;
  for (double p : raw) {
    if (p > b && price_residual(model, p, b) <= kRootResidualTol) {
      out.push_back(p);
    }
  }
  return out;
}

std::optional<ItemValue> item_value(const UtilityModel& model, double b, double p_upper) {
  const std::vector<double> prices = candidate_prices(model, b, p_upper);
  std::optional<ItemValue> best;
  for (double p : prices) {
    const double slope = util_slope(model, p);
    const double f = -std::exp(util_value(model, p)) / slope;
    if (!best || f > best->value) {
      best = ItemValue{f, p};
    }
  }
  return best;
}

std::vector<int> top_k_values(const std::vector<double>& values, int k) {
  std::vector<int> order;
  order.reserve(values.size());
  for (int i = 0; i < static_cast<int>(values.size()); ++i) {
    if (values[static_cast<std::size_t>(i)] > 0.0) {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&values](int a, int b) {
    const double va = values[static_cast<std::size_t>(a)];
    const double vb = values[static_cast<std::size_t>(b)];
    if (va != vb) {
      return va > vb;
    }
    return a < b;
  });
  if (static_cast<int>(order.size()) > k) {
    order.resize(static_cast<std::size_t>(k));
  }
  std::sort(order.begin(), order.end());
  return order;
}

OptimizationResult fixed_point_solve(const std::vector<FixedPointItem>& items, int assort_cap,
                                     const FixedPointConfig& config) {
  if (items.empty()) {
    throw ConfigError("fixed_point_solve: item list is empty");
  }
  if (assort_cap < 1) {
    throw ConfigError("fixed_point_solve: assort_cap must be at least 1");
  }
  if (!(config.p_upper > 0.0)) {
    throw ConfigError("fixed_point_solve: p_upper must be positive");
  }
  if (!(config.epsilon > 0.0)) {
    throw ConfigError("fixed_point_solve: epsilon must be positive");
  }

  const auto evaluate = [&items, assort_cap, &config](double b) {
    std::vector<std::optional<ItemValue>> per_item(items.size());
    std::vector<double> values(items.size(), 0.0);
    for (std::size_t i = 0; i < items.size(); ++i) {
      per_item[i] = item_value(items[i].model, b, config.p_upper);
      if (per_item[i]) {
        values[i] = per_item[i]->value;
      }
    }
    const std::vector<int> chosen = top_k_values(values, assort_cap);
    double total = 0.0;
    for (int pos : chosen) {
      total += values[static_cast<std::size_t>(pos)];
    }
    return std::tuple(total, chosen, per_item);
  };

  double b_lo = 0.0;
  double b_hi = config.p_upper;
  // With a very loose upper bound, every candidate value can underflow to
  // zero across most of [0, p_upper]; the aggregate map is nonincreasing, so
  // a level where it vanishes is already above the fixed point and the
  // bracket can be pulled down before bisection starts.
  while (b_hi > config.epsilon && std::get<0>(evaluate(b_hi)) == 0.0) {
    b_hi *= 0.5;
  }
  const int max_iter =
      static_cast<int>(std::ceil(std::log2(config.p_upper / config.epsilon))) + 8;
  int iterations = 0;
  for (; iterations < max_iter; ++iterations) {
    const double b = 0.5 * (b_lo + b_hi);
    const double total = std::get<0>(evaluate(b));
    if (total < b) {
      b_hi = b;  // the level overshoots the fixed point
    } else {
      b_lo = b;
    }
  }

  double b_mid = 0.5 * (b_lo + b_hi);
  auto [total, chosen, per_item] = evaluate(b_mid);
  // Every item attains a strictly positive value at any level below the fixed
  // point, so an empty selection here can only come from floating-point
  // underflow of the value map. Lower the level until something registers.
  for (int guard = 0; chosen.empty() && b_mid > 0.0 && guard < 4096; ++guard) {
    b_mid *= 0.5;
    std::tie(total, chosen, per_item) = evaluate(b_mid);
  }

  OptimizationResult result;
  result.revenue = b_mid;
  result.iterations = iterations;
  result.residual = std::abs(b_mid - total);
  // `chosen` holds ascending positions; items are not required to arrive in
  // catalog order, so sort the final pairs by catalog index.
  std::vector<std::pair<int, double>> pairs;
  pairs.reserve(chosen.size());
  for (int pos : chosen) {
    pairs.emplace_back(items[static_cast<std::size_t>(pos)].index,
                       per_item[static_cast<std::size_t>(pos)]->price);
  }
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [index, price] : pairs) {
    result.assortment.push_back(index);
    result.prices.push_back(price);
  }
  return result;
}

}  // namespace mnl_lab
