#include "mnl_lab/utilities.hpp"

#include <algorithm>
#include <cmath>

namespace mnl_lab {

double ConfUtility::raw_value(double p) const {
  const double q = std::max(0.0, a3 - 2.0 * a4 * p + a5 * p * p);
  return a1 - a2 * p + std::sqrt(q);
}

double ConfUtility::raw_slope(double p) const {
  const double q = std::max(0.0, a3 - 2.0 * a4 * p + a5 * p * p);
  const double root = std::sqrt(q);
  if (root == 0.0) {
    // At a degenerate touch point the sqrt term has slope +-sqrt(a5); the
    // outgoing (right) branch applies for the piecewise evaluation.
    return -a2 + std::sqrt(a5);
  }
  return -a2 + (a5 * p - a4) / root;
}

double ConfUtility::value(double p) const {
  if (p < p0) {
    return raw_value(p);
  }
  return raw_value(p0) - l0 * (p - p0);
}

double ConfUtility::slope(double p) const {
  if (p < p0) {
    return raw_slope(p);
  }
  return -l0;
}

double util_value(const UtilityModel& model, double p) {
  return std::visit(
      [p](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearUtility>) {
          return m.alpha - m.beta * p;
        } else {
          return m.value(p);
        }
      },
      model);
}

double util_slope(const UtilityModel& model, double p) {
  return std::visit(
      [p](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearUtility>) {
          return -m.beta;
        } else {
          return m.slope(p);
        }
      },
      model);
}

double util_at_zero(const UtilityModel& model) { return util_value(model, 0.0); }

}  // namespace mnl_lab
