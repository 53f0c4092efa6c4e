#include "mnl_lab/estimation.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "mnl_lab/errors.hpp"

namespace mnl_lab {

namespace {

// Choice probabilities of one record's offered items under theta (flat form);
// the outside option keeps the remaining mass.
std::vector<double> record_probs(const InteractionRecord& record, const Eigen::VectorXd& theta) {
  std::vector<double> u(record.features.size());
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = theta.dot(record.features[i].vec);
    m = std::max(m, u[i]);
  }
  double sum = std::exp(-m);
  for (double ui : u) {
    sum += std::exp(ui - m);
  }
  const double lse = m + std::log(sum);
  std::vector<double> q(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    q[i] = std::exp(u[i] - lse);
  }
  return q;
}

double nll_flat(const std::vector<InteractionRecord>& records, const Eigen::VectorXd& theta) {
  double total = 0.0;
  for (const InteractionRecord& record : records) {
    double m = 0.0;
    double u_chosen = 0.0;  // outside option
    double sum = 0.0;
    std::vector<double> u(record.features.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = theta.dot(record.features[i].vec);
      m = std::max(m, u[i]);
    }
    sum = std::exp(-m);
    for (double ui : u) {
      sum += std::exp(ui - m);
    }
    if (record.chosen != kOutsideOption) {
      u_chosen = u.at(static_cast<std::size_t>(record.chosen));
    }
    total += m + std::log(sum) - u_chosen;
  }
  return total;
}

Eigen::VectorXd nll_grad_flat(const std::vector<InteractionRecord>& records,
                              const Eigen::VectorXd& theta) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  for (const InteractionRecord& record : records) {
    const std::vector<double> q = record_probs(record, theta);
    for (std::size_t i = 0; i < q.size(); ++i) {
      g += q[i] * record.features[i].vec;
    }
    if (record.chosen != kOutsideOption) {
      g -= record.features.at(static_cast<std::size_t>(record.chosen)).vec;
    }
  }
  return g;
}

Eigen::MatrixXd fisher_flat(const InteractionRecord& record, const Eigen::VectorXd& theta) {
  const Eigen::Index dim = theta.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const std::vector<double> q = record_probs(record, theta);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Eigen::VectorXd& f = record.features[i].vec;
    h.selfadjointView<Eigen::Lower>().rankUpdate(f, q[i]);
    s += q[i] * f;
  }
  h.selfadjointView<Eigen::Lower>().rankUpdate(s, -1.0);
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  return h;
}

Eigen::VectorXd project_to_ball(Eigen::VectorXd v, double radius) {
  const double norm = v.norm();
  if (norm > radius) {
    v *= radius / norm;
  }
  return v;
}

}  // namespace

ExtendedFeature make_extended(const Eigen::VectorXd& context, double price) {
  ExtendedFeature f;
  f.vec.resize(2 * context.size());
  f.vec.head(context.size()) = context;
  f.vec.tail(context.size()) = -price * context;
  return f;
}

double nll(const std::vector<InteractionRecord>& records, const ParamVector& theta) {
  return nll_flat(records, theta.flat());
}

Eigen::VectorXd nll_grad(const std::vector<InteractionRecord>& records, const ParamVector& theta) {
  return nll_grad_flat(records, theta.flat());
}

Eigen::MatrixXd fisher_matrix(const InteractionRecord& record, const ParamVector& theta) {
  return fisher_flat(record, theta.flat());
}

ParamVector mle_fit(const std::vector<InteractionRecord>& records, const EstimatorConfig& config,
                    const ParamVector& warm_start) {
  if (records.empty()) {
    throw InsufficientDataError("mle_fit: at least one record required");
  }
  const double cap = config.theta_cap;
  Eigen::VectorXd theta = project_to_ball(warm_start.flat(), cap);
  double f = nll_flat(records, theta);
  const double grad_tol = config.tol_grad * std::max<std::size_t>(1, records.size());
  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-12;

  for (int iter = 0; iter < config.max_newton_iter; ++iter) {
    const Eigen::VectorXd g = nll_grad_flat(records, theta);
    if (g.norm() <= grad_tol) {
      break;
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(theta.size(), theta.size());
    for (const InteractionRecord& record : records) {
      h += fisher_flat(record, theta);
    }
    h.diagonal().array() += 1e-8;
    Eigen::VectorXd dir = Eigen::LDLT<Eigen::MatrixXd>(h).solve(-g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      dir = -g;  // fall back to steepest descent if the solve lost descent
      slope = -g.squaredNorm();
    }

    bool accepted = false;
    Eigen::VectorXd next;
    for (double step = 1.0; step >= kMinStep; step *= 0.5) {
      Eigen::VectorXd trial = project_to_ball(theta + step * dir, cap);
      const double f_trial = nll_flat(records, trial);
      if (f_trial <= f + kArmijo * step * slope) {
        next = std::move(trial);
        f = f_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      break;  // stalled against the ball boundary or at numerical optimality
    }
    const double moved = (next - theta).norm();
    theta = std::move(next);
    if (moved <= 1e-14 * (1.0 + theta.norm())) {
      break;
    }
  }
  return ParamVector::from_flat(theta);
}

double confidence_radius(long t, int dim, long horizon, const EstimatorConfig& config) {
  if (t < 1) {
    throw ConfigError("confidence_radius: t must be at least 1");
  }
  const double d = static_cast<double>(dim);
  const double tt = static_cast<double>(t);
  const double width = std::sqrt(d * std::log(1.0 + 2.0 * tt * tt * tt / d));
  return config.alpha_scale * (width + std::log(static_cast<double>(horizon)) / config.sigma0);
}

BonusCoeffs conf_bonus_coeffs(const Eigen::VectorXd& context, const InfoMatrix& v) {
  const Eigen::Index d = context.size();
  if (v.dim() != 2 * d) {
    throw ConfigError("conf_bonus_coeffs: InfoMatrix must have twice the context dimension");
  }
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(2 * d);
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(2 * d);
  e1.head(d) = context;
  e2.tail(d) = context;
  BonusCoeffs out;
  out.c1 = std::max(0.0, v.inv_quad_form(e1));
  out.c3 = std::max(0.0, v.inv_quad_form(e2));
  out.c2 = v.inv_quad_form(e1, e2);
  const double bound = std::sqrt(out.c1 * out.c3);
  out.c2 = std::clamp(out.c2, -bound, bound);
  return out;
}

ConfUtility tighten_utility(double psi_dot_x, double phi_dot_x, const BonusCoeffs& bonus,
                            double alpha, double l0) {
  if (!(l0 > 0.0)) {
    throw ConfigError("tighten_utility: l0 must be positive");
  }
  ConfUtility m;
  m.a1 = psi_dot_x;
  m.a2 = phi_dot_x;
  m.a3 = alpha * alpha * bonus.c1;
  m.a4 = alpha * alpha * bonus.c2;
  m.a5 = alpha * alpha * bonus.c3;
  m.l0 = l0;

  const double root_a5 = std::sqrt(std::max(0.0, m.a5));
  if (-m.a2 - root_a5 >= -l0) {
    throw ConstructionError("tighten_utility: slope cannot reach -l0 anywhere");
  }
  if (-m.a2 + root_a5 <= -l0) {
    // The raw curve is at least as steep as -l0 for every price.
    m.p0 = std::numeric_limits<double>::infinity();
    return m;
  }
  // Solve raw_slope(p0) = -l0 by bisection: the bonus term is strictly
  // convex, so the raw slope strictly increases and crosses -l0 exactly once
  // (a degenerate bonus jumps across it at the |affine| kink; the bisection
  // then converges onto the kink). Bracket by geometric expansion first.
  double lo = 0.0;
  double hi = 0.0;
  int guard = 0;
  while (m.raw_slope(lo) >= -l0 && ++guard < 200) {
    lo = 2.0 * lo - 1.0;
  }
  if (guard >= 200) {
    throw ConstructionError("tighten_utility: slope crossing has no left bracket");
  }
  guard = 0;
  while (m.raw_slope(hi) <= -l0 && ++guard < 200) {
    hi = 2.0 * hi + 1.0;
  }
  if (guard >= 200) {
    m.p0 = std::numeric_limits<double>::infinity();
    return m;
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo) + std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (m.raw_slope(mid) < -l0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  m.p0 = 0.5 * (lo + hi);

#ifndef NDEBUG
  // Sampled finite differences of the assembled piecewise curve must stay at
  // or below -l0 (up to the central-difference error).
  const double span = 3.0 * (1.0 + 1.0 / l0) + std::max(0.0, m.p0);
  const double step = 1e-5 * (1.0 + span);
  for (int k = 0; k <= 16; ++k) {
    const double p = span * static_cast<double>(k) / 16.0;
    const double fd = (m.value(p + step) - m.value(p - step)) / (2.0 * step);
    assert(fd <= -l0 + 1e-6 * (1.0 + std::abs(fd)));
  }
#endif
  return m;
}

Eigen::VectorXd per_round_grad(const InteractionRecord& record, const ParamVector& theta) {
  const Eigen::VectorXd flat = theta.flat();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(flat.size());
  const std::vector<double> q = record_probs(record, flat);
  for (std::size_t i = 0; i < q.size(); ++i) {
    g += q[i] * record.features[i].vec;
  }
  if (record.chosen != kOutsideOption) {
    g -= record.features.at(static_cast<std::size_t>(record.chosen)).vec;
  }
  return g;
}

ParamVector ons_update(const ParamVector& theta_prev, const Eigen::VectorXd& grad,
                       const InfoMatrix& v, const ParamVector& theta0, double gamma) {
  if (!(gamma > 0.0)) {
    throw ConfigError("ons_update: gamma must be positive");
  }
  const double radius = 0.5 * gamma;
  const Eigen::VectorXd prev = theta_prev.flat();
  const Eigen::VectorXd center = theta0.flat();

  // Unconstrained stationary point: V (theta - prev) = -4 grad.
  const Eigen::VectorXd theta_u = prev + v.solve(-4.0 * grad);
  if ((theta_u - center).norm() <= radius) {
    return ParamVector::from_flat(theta_u);
  }

  // Constrained case: theta(lambda) solves (V + lambda I) theta =
  // V prev - 4 grad + lambda center, and ||theta(lambda) - center|| decreases
  // in lambda. Bracket by doubling, then bisect onto the sphere.
  const Eigen::VectorXd base = v.matrix() * prev - 4.0 * grad;
  const auto solve_at = [&](double lambda) {
    Eigen::MatrixXd m = v.matrix();
    m.diagonal().array() += lambda;
    return Eigen::VectorXd(Eigen::LDLT<Eigen::MatrixXd>(m).solve(base + lambda * center));
  };

  double lo = 0.0;
  double hi = 1.0;
  while ((solve_at(hi) - center).norm() > radius) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) {
      throw ConvergenceError("ons_update: failed to bracket the projection multiplier");
    }
  }
  Eigen::VectorXd theta = solve_at(hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const Eigen::VectorXd candidate = solve_at(mid);
    const double dist = (candidate - center).norm();
    if (std::abs(dist - radius) <= 1e-8) {
      theta = candidate;
      break;
    }
    if (dist > radius) {
      lo = mid;
    } else {
      hi = mid;
      theta = candidate;
    }
  }
  // Radial clip so the feasibility guarantee is exact even if the bisection
  // stopped on the infeasible side of its tolerance band.
  Eigen::VectorXd offset = theta - center;
  const double dist = offset.norm();
  if (dist > radius) {
    offset *= radius / dist;
  }
  return ParamVector::from_flat(center + offset);
}

double estimate_l0(const Eigen::VectorXd& phi_hat, const std::vector<Eigen::VectorXd>& contexts_seen,
                   double sigma0, int k_cap, long horizon, double l0_floor) {
  if (contexts_seen.empty()) {
    throw InsufficientDataError("estimate_l0: pilot contexts required");
  }
  if (!(sigma0 > 0.0) || k_cap < 1 || horizon < 1 || !(l0_floor > 0.0)) {
    throw ConfigError("estimate_l0: invalid arguments");
  }
  double min_dot = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& x : contexts_seen) {
    min_dot = std::min(min_dot, phi_hat.dot(x));
  }
  const double correction =
      std::pow(static_cast<double>(horizon), -0.25) * std::sqrt(static_cast<double>(k_cap) / sigma0);
  return std::max(min_dot - correction, l0_floor);
}

}  // namespace mnl_lab
