#pragma once

#include <Eigen/Core>
#include <vector>

#include "mnl_lab/choice_model.hpp"
#include "mnl_lab/info_matrix.hpp"
#include "mnl_lab/utilities.hpp"

namespace mnl_lab {

// Feature of one offered item as seen by the learner: (x; -p x) in R^{2d},
// so that theta = (psi; phi) gives utility <theta, feature>.
struct ExtendedFeature {
  Eigen::VectorXd vec;
};

ExtendedFeature make_extended(const Eigen::VectorXd& context, double price);

// One observed round: the offered items' extended features and the buyer's
// pick (position within the offer, or kOutsideOption).
struct InteractionRecord {
  std::vector<ExtendedFeature> features;
  int chosen = kOutsideOption;
};

struct EstimatorConfig {
  double sigma0 = 1.0;       // lower bound on the context covariance spectrum
  double alpha_scale = 1.0;  // multiplier on the confidence radius
  double gamma = 0.0;        // online-update ball diameter; 0 = derive from the price cap
  double theta_cap = 2.0;    // MLE search ball radius
  double tol_grad = 1e-8;    // per-record gradient tolerance, see mle_fit
  int max_newton_iter = 50;
};

// Negative log-likelihood of the observed choices under theta, with the
// outside option's utility fixed at 0. Computed in log-space.
double nll(const std::vector<InteractionRecord>& records, const ParamVector& theta);

// Gradient sum_r sum_i (q_ri - y_ri) feature_ri, y the one-hot choice.
Eigen::VectorXd nll_grad(const std::vector<InteractionRecord>& records, const ParamVector& theta);

// One record's Hessian contribution sum_i q_i f_i f_i^T - s s^T with
// s = sum_i q_i f_i. Positive semidefinite.
Eigen::MatrixXd fisher_matrix(const InteractionRecord& record, const ParamVector& theta);

// Maximum-likelihood estimate by damped Newton with Armijo backtracking,
// constrained to ||theta|| <= theta_cap by scaling escaping trial points
// back to the boundary. Stops when ||grad|| <= tol_grad * max(1, #records),
// when steps stall, or after max_newton_iter iterations. The returned point
// never has larger nll than the (projected) warm start.
ParamVector mle_fit(const std::vector<InteractionRecord>& records, const EstimatorConfig& config,
                    const ParamVector& warm_start);

// alpha_t = alpha_scale * (sqrt(d ln(1 + 2t^3/d)) + ln(horizon)/sigma0),
// nondecreasing in t. `dim` is the context dimension d.
double confidence_radius(long t, int dim, long horizon, const EstimatorConfig& config);

// Quadratic-form coefficients of the price-dependent bonus: with V^{-1}
// partitioned into d x d blocks [[A, B], [B^T, C]],
//   g(p)^2 = alpha^2 (c1 - 2 c2 p + c3 p^2),
//   c1 = x^T A x, c2 = x^T B x (symmetrized), c3 = x^T C x.
// Roundoff is clamped so that c1, c3 >= 0 and c2^2 <= c1 c3, keeping the
// radicand a nonnegative quadratic.
struct BonusCoeffs {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

BonusCoeffs conf_bonus_coeffs(const Eigen::VectorXd& context, const InfoMatrix& v);

// Assembles the optimistic curve a1 = <psi_hat, x>, a2 = <phi_hat, x>,
// (a3, a4, a5) = alpha^2 (c1, c2, c3), and solves for the knee p0 where the
// raw slope reaches -l0 (closed form; +infinity when the curve stays steeper
// on its own). Throws ConstructionError when -a2 - sqrt(a5) >= -l0: no
// tightening can make such a curve decrease at rate l0.
ConfUtility tighten_utility(double psi_dot_x, double phi_dot_x, const BonusCoeffs& bonus,
                            double alpha, double l0);

// Single-round gradient sum_i q_i f_i - f_chosen (zero vector subtracted for
// the outside option). Equals nll_grad on a one-record list.
Eigen::VectorXd per_round_grad(const InteractionRecord& record, const ParamVector& theta);

// Online Newton step: minimizes
//   (1/2)||theta - theta_prev||_V^2 + 4 (theta - theta_prev)^T grad
// over the ball ||theta - theta0|| <= gamma/2. Returns the unconstrained
// stationary point when feasible; otherwise finds the multiplier lambda with
// ||theta(lambda) - theta0|| = gamma/2 by bisection (the norm is monotone in
// lambda) and projects radially so feasibility holds exactly.
ParamVector ons_update(const ParamVector& theta_prev, const Eigen::VectorXd& grad,
                       const InfoMatrix& v, const ParamVector& theta0, double gamma);

// Pilot estimate of the minimum price sensitivity:
//   min over seen contexts of <phi_hat, x>  -  horizon^{-1/4} sqrt(k_cap / sigma0),
// floored at l0_floor.
double estimate_l0(const Eigen::VectorXd& phi_hat, const std::vector<Eigen::VectorXd>& contexts_seen,
                   double sigma0, int k_cap, long horizon, double l0_floor);

}  // namespace mnl_lab
