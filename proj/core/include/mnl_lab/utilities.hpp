#pragma once

#include <variant>

namespace mnl_lab {

// Affine utility curve h(p) = alpha - beta * p with beta > 0. Used both for
// ground-truth pricing (alpha = <psi, x>, beta = <phi, x>) and for the greedy
// plug-in policy.
struct LinearUtility {
  double alpha = 0.0;
  double beta = 1.0;
};

// Optimistic utility curve
//
//   h~(p) = a1 - a2 p + sqrt(a3 - 2 a4 p + a5 p^2),
//
// linearized beyond the knee p0 where the slope first reaches -l0:
//
//   h(p) = h~(p)            for p <  p0,
//          h~(p0) - l0 (p - p0)  for p >= p0.
//
// The radicand a3 - 2 a4 p + a5 p^2 is a nonnegative quadratic
// (a4^2 <= a3 a5, a5 >= 0), so sqrt of it is convex and the slope of h~
// increases from -a2 - sqrt(a5) toward -a2 + sqrt(a5) as p grows. The knee
// caps the slope at -l0, which the pricing solver requires everywhere. p0
// may be negative (the linear ray then covers all p >= 0) or +infinity (the
// curve stays steeper than -l0 on its own).
struct ConfUtility {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
  double a5 = 0.0;
  double l0 = 0.0;
  double p0 = 0.0;  // knee location; may be -inf-like negative or +infinity

  // Raw concave curve h~ and derivatives, with the radicand clamped at 0
  // against roundoff near a degenerate (perfect-square) bonus.
  double raw_value(double p) const;
  double raw_slope(double p) const;

  // Piecewise-tightened curve used by the pricing solver.
  double value(double p) const;
  double slope(double p) const;
};

// A per-item utility curve handed to the pricing solver.
using UtilityModel = std::variant<LinearUtility, ConfUtility>;

double util_value(const UtilityModel& model, double p);
double util_slope(const UtilityModel& model, double p);

// h(0), used to widen the price search interval when optimistic intercepts
// exceed the nominal bound.
double util_at_zero(const UtilityModel& model);

}  // namespace mnl_lab
