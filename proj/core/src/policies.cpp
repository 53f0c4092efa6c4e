#include "mnl_lab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "mnl_lab/errors.hpp"
#include "mnl_lab/rng.hpp"
#include "mnl_lab/streams.hpp"

namespace mnl_lab {

namespace {

// Nonempty assortment drawn uniformly via (uniform size in {1..K}, uniform
// subset of that size), returned ascending. Partial Fisher-Yates keeps the
// draw count at `size` swaps regardless of catalog size.
std::vector<int> uniform_assortment(int n_items, int assort_cap, Rng& rng) {
  const int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(assort_cap)));
  std::vector<int> pool(static_cast<std::size_t>(n_items));
  std::iota(pool.begin(), pool.end(), 0);
  for (int k = 0; k < size; ++k) {
    const auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_items - k)));
    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(size));
  std::sort(pool.begin(), pool.end());
  return pool;
}

double auto_epsilon(double configured, double p_upper) {
  return configured > 0.0 ? configured : 1e-6 * std::max(p_upper, 1.0);
}

InteractionRecord build_record(const ContextRound& round, const Offer& offer, int chosen) {
  InteractionRecord record;
  record.features.reserve(offer.size());
  for (std::size_t k = 0; k < offer.size(); ++k) {
    record.features.push_back(make_extended(
        round.contexts.at(static_cast<std::size_t>(offer.items[k])), offer.prices[k]));
  }
  record.chosen = chosen;
  return record;
}

class RandomPolicy final : public Policy {
 public:
  RandomPolicy(ProblemInstance instance, std::uint64_t seed)
      : instance_(std::move(instance)),
        seed_(seed),
        cap_(price_cap(instance_.assort_cap, instance_.l0)) {}

  Offer act(const ContextRound& round) override {
    Rng rng = Rng::stream(seed_, {streams::kPolicy, static_cast<std::uint64_t>(round.round)});
    Offer offer;
    offer.items = uniform_assortment(instance_.n_items, instance_.assort_cap, rng);
    offer.prices.reserve(offer.items.size());
    for (std::size_t k = 0; k < offer.items.size(); ++k) {
      offer.prices.push_back(rng.uniform(0.0, cap_));
    }
    return offer;
  }

  void update(const ContextRound&, const Offer&, int) override {}

  PolicyDiagnostics diagnostics() const override { return {}; }

 private:
  ProblemInstance instance_;
  std::uint64_t seed_;
  double cap_;
};

class OraclePolicy final : public Policy {
 public:
  OraclePolicy(ProblemInstance instance, PolicyConfig config)
      : instance_(std::move(instance)), config_(std::move(config)) {}

  Offer act(const ContextRound& round) override {
    const OptimizationResult result = oracle_solve(instance_, round, config_.epsilon_opt);
    last_revenue_ = result.revenue;
    return Offer{result.assortment, result.prices};
  }

  void update(const ContextRound&, const Offer&, int) override {}

  PolicyDiagnostics diagnostics() const override {
    PolicyDiagnostics d;
    d.l0_used = instance_.l0;
    d.last_internal_revenue = last_revenue_;
    return d;
  }

 private:
  ProblemInstance instance_;
  PolicyConfig config_;
  double last_revenue_ = 0.0;
};

// Shared skeleton of the learning policies. All three initialize by acting
// randomly for t0 rounds to seed the information matrix; afterwards they
// differ in how the estimate is refreshed (full MLE refits vs online Newton
// steps) and in how the per-item curves are built (optimistic vs plug-in).
class ContextualPolicy final : public Policy {
 public:
  ContextualPolicy(PolicyKind kind, ProblemInstance instance, PolicyConfig config,
                   std::uint64_t seed)
      : kind_(kind),
        instance_(std::move(instance)),
        config_(std::move(config)),
        seed_(seed),
        t0_(resolve_t0(config_, instance_)),
        v_(2 * instance_.dim),
        theta_hat_(Eigen::VectorXd::Zero(instance_.dim), Eigen::VectorXd::Zero(instance_.dim)) {}

  Offer act(const ContextRound& round) override {
    const long t = round.round;
    if (t < t0_) {
      return act_init(t);
    }
    if (t != last_estimate_round_) {
      refresh_estimate(t);
    }
    return act_learning(round, t);
  }

  void update(const ContextRound& round, const Offer& offer, int chosen) override {
    const long t = round.round;
    InteractionRecord record = build_record(round, offer, chosen);
    if (t < t0_) {
      const double k = static_cast<double>(instance_.assort_cap);
      for (const ExtendedFeature& f : record.features) {
        v_.add_scaled_outer(1.0 / (k * k), f.vec);
      }
      records_.push_back(std::move(record));
      if (config_.l0_mode == L0Mode::kEstimated) {
        pilot_contexts_.insert(pilot_contexts_.end(), round.contexts.begin(),
                               round.contexts.end());
      }
      return;
    }
    v_.add_sym(fisher_matrix(record, theta_hat_));
    if (kind_ == PolicyKind::kCapOns) {
      last_record_ = std::move(record);
      has_last_record_ = true;
    } else {
      records_.push_back(std::move(record));
    }
  }

  PolicyDiagnostics diagnostics() const override {
    PolicyDiagnostics d;
    d.t0 = t0_;
    d.l0_used = l0_used_;
    d.min_eig_v_init_end = min_eig_init_end_;
    d.excluded_items = excluded_;
    d.record_count = records_.size() + (has_last_record_ ? 1 : 0);
    d.last_internal_revenue = last_internal_revenue_;
    return d;
  }

  const InfoMatrix* info_matrix() const override { return &v_; }

  const ParamVector* theta_hat() const override {
    return has_estimate_ ? &theta_hat_ : nullptr;
  }

  double alpha_at(long t) const override {
    return confidence_radius(t, instance_.dim, instance_.horizon, config_.estimator);
  }

 private:
  Offer act_init(long t) {
    Rng rng = Rng::stream(seed_, {streams::kPolicy, static_cast<std::uint64_t>(t)});
    Offer offer;
    offer.items = uniform_assortment(instance_.n_items, instance_.assort_cap, rng);
    offer.prices.reserve(offer.items.size());
    for (std::size_t k = 0; k < offer.items.size(); ++k) {
      offer.prices.push_back(rng.uniform(1.0, 2.0));
    }
    return offer;
  }

  // Pilot MLE on the initialization data; resolves l0 and gamma, and fixes
  // the online-update anchor theta0.
  void begin_learning() {
    min_eig_init_end_ = v_.min_eigenvalue();
    const ParamVector zero(Eigen::VectorXd::Zero(instance_.dim),
                           Eigen::VectorXd::Zero(instance_.dim));
    theta_hat_ = records_.empty() ? zero : mle_fit(records_, config_.estimator, zero);
    has_estimate_ = true;
    l0_used_ = instance_.l0;
    if (config_.l0_mode == L0Mode::kEstimated) {
      l0_used_ = estimate_l0(theta_hat_.phi, pilot_contexts_, config_.estimator.sigma0,
                             instance_.assort_cap, instance_.horizon, config_.l0_floor);
      pilot_contexts_.clear();
      pilot_contexts_.shrink_to_fit();
    }
    gamma_ = config_.estimator.gamma > 0.0
                 ? config_.estimator.gamma
                 : std::log(2.0) / (8.0 * (1.0 + price_cap(instance_.assort_cap, l0_used_)));
    if (kind_ == PolicyKind::kCapOns) {
      theta0_ = theta_hat_;
      records_.clear();
      records_.shrink_to_fit();
    }
  }

  void refresh_estimate(long t) {
    if (!has_estimate_) {
      begin_learning();
    } else if (kind_ == PolicyKind::kCapOns) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * instance_.dim);
      if (has_last_record_) {
        g = per_round_grad(last_record_, theta_hat_);
      }
      theta_hat_ = ons_update(theta_hat_, g, v_, theta0_, gamma_);
    } else {
      const long cadence = std::max(1, config_.mle_refit_every);
      if ((t - t0_) % cadence == 0) {
        theta_hat_ = mle_fit(records_, config_.estimator, theta_hat_);
      }
    }
    last_estimate_round_ = t;
  }

  Offer act_learning(const ContextRound& round, long t) {
    std::vector<FixedPointItem> items;
    items.reserve(static_cast<std::size_t>(instance_.n_items));
    const double alpha = kind_ == PolicyKind::kGreedy ? 0.0 : alpha_at(t);
    for (int i = 0; i < instance_.n_items; ++i) {
      const Eigen::VectorXd& x = round.contexts.at(static_cast<std::size_t>(i));
      const double psi_dot = theta_hat_.psi.dot(x);
      const double phi_dot = theta_hat_.phi.dot(x);
      if (kind_ == PolicyKind::kGreedy) {
        items.push_back({i, LinearUtility{psi_dot, std::max(phi_dot, l0_used_)}});
        continue;
      }
      try {
        const BonusCoeffs bonus = conf_bonus_coeffs(x, v_);
        items.push_back({i, tighten_utility(psi_dot, phi_dot, bonus, alpha, l0_used_)});
      } catch (const ConstructionError&) {
        ++excluded_;  // estimate wildly off for this item; skip it this round
      }
    }
    if (items.empty()) {
      // Every item was excluded this round; fall back to an exploratory offer
      // so the run stays live and keeps gathering information.
      return act_init(t);
    }
    double max_h0 = 0.0;
    for (const FixedPointItem& item : items) {
      max_h0 = std::max(max_h0, util_at_zero(item.model));
    }
    // During learning all offered prices must stay within the fixed budget
    // band [0, price_cap], so the solver's price ceiling is anchored at the
    // unit utility level even when optimistic utilities are still inflated.
    const double mu = std::min(std::max(0.0, max_h0 - 1.0), 1.0);
    const double p_upper = price_bound(mu, instance_.assort_cap, l0_used_);
    FixedPointConfig fp;
    fp.epsilon = auto_epsilon(config_.epsilon_opt, p_upper);
    fp.p_upper = p_upper;
    const OptimizationResult result = fixed_point_solve(items, instance_.assort_cap, fp);
    last_internal_revenue_ = result.revenue;
    return Offer{result.assortment, result.prices};
  }

  PolicyKind kind_;
  ProblemInstance instance_;
  PolicyConfig config_;
  std::uint64_t seed_;
  long t0_;
  InfoMatrix v_;
  ParamVector theta_hat_;
  ParamVector theta0_;
  std::vector<InteractionRecord> records_;
  InteractionRecord last_record_;
  std::vector<Eigen::VectorXd> pilot_contexts_;
  bool has_estimate_ = false;
  bool has_last_record_ = false;
  long last_estimate_round_ = -1;
  double l0_used_ = 0.0;
  double gamma_ = 0.0;
  double min_eig_init_end_ = 0.0;
  long excluded_ = 0;
  double last_internal_revenue_ = 0.0;
};

}  // namespace

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "cap") return PolicyKind::kCap;
  if (name == "cap-ons") return PolicyKind::kCapOns;
  if (name == "greedy") return PolicyKind::kGreedy;
  if (name == "oracle") return PolicyKind::kOracle;
  if (name == "random") return PolicyKind::kRandom;
  throw ConfigError("unknown policy: " + name);
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kCap: return "cap";
    case PolicyKind::kCapOns: return "cap-ons";
    case PolicyKind::kGreedy: return "greedy";
    case PolicyKind::kOracle: return "oracle";
    case PolicyKind::kRandom: return "random";
  }
  throw ConfigError("unknown policy kind");
}

long resolve_t0(const PolicyConfig& config, const ProblemInstance& instance) {
  long t0 = config.t0;
  if (t0 <= 0) {
    const double raw = config.t0_scale * static_cast<double>(instance.dim) *
                       static_cast<double>(instance.assort_cap) *
                       std::log(static_cast<double>(std::max<long>(instance.horizon, 2)));
    t0 = static_cast<long>(std::ceil(raw));
    const long lo = 2 * instance.dim;
    const long hi = std::max<long>(instance.horizon / 4, 1);
    // A horizon too short for the full budget keeps the upper clamp.
    t0 = hi < lo ? hi : std::clamp(t0, lo, hi);
  }
  if (config.l0_mode == L0Mode::kEstimated) {
    const auto pilot = static_cast<long>(
        std::ceil(std::sqrt(static_cast<double>(instance.horizon))));
    t0 = std::max(t0, pilot);
  }
  return t0;
}

double price_cap(int assort_cap, double l0) {
  return price_bound(1.0, assort_cap, l0) + 1.0 / l0;
}

double Policy::alpha_at(long) const { return 0.0; }

std::unique_ptr<Policy> make_policy(PolicyKind kind, const ProblemInstance& instance,
                                    const PolicyConfig& config, std::uint64_t seed) {
  switch (kind) {
    case PolicyKind::kCap:
    case PolicyKind::kCapOns:
    case PolicyKind::kGreedy:
      return std::make_unique<ContextualPolicy>(kind, instance, config, seed);
    case PolicyKind::kOracle:
      return std::make_unique<OraclePolicy>(instance, config);
    case PolicyKind::kRandom:
      return std::make_unique<RandomPolicy>(instance, seed);
  }
  throw ConfigError("make_policy: unknown policy kind");
}

OptimizationResult oracle_solve(const ProblemInstance& instance, const ContextRound& round,
                                double epsilon) {
  std::vector<FixedPointItem> items;
  items.reserve(static_cast<std::size_t>(instance.n_items));
  double max_h0 = 0.0;
  for (int i = 0; i < instance.n_items; ++i) {
    const Eigen::VectorXd& x = round.contexts.at(static_cast<std::size_t>(i));
    const LinearUtility u{instance.theta_star.psi.dot(x), instance.theta_star.phi.dot(x)};
    max_h0 = std::max(max_h0, u.alpha);
    items.push_back({i, u});
  }
  const double mu = std::max(0.0, max_h0 - 1.0);
  FixedPointConfig fp;
  fp.p_upper = price_bound(mu, instance.assort_cap, instance.l0);
  fp.epsilon = auto_epsilon(epsilon, fp.p_upper);
  return fixed_point_solve(items, instance.assort_cap, fp);
}

}  // namespace mnl_lab
