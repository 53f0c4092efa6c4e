#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mnl_lab/choice_model.hpp"
#include "mnl_lab/estimation.hpp"
#include "mnl_lab/info_matrix.hpp"
#include "mnl_lab/optimize.hpp"

namespace mnl_lab {

enum class PolicyKind { kCap, kCapOns, kGreedy, kOracle, kRandom };

PolicyKind policy_kind_from_string(const std::string& name);
std::string to_string(PolicyKind kind);

// How the learner obtains the minimum price sensitivity l0: read it off the
// instance, or estimate it from the pilot data.
enum class L0Mode { kKnown, kEstimated };

struct PolicyConfig {
  long t0 = 0;             // initialization rounds; 0 = auto rule below
  double t0_scale = 2.0;   // auto: ceil(t0_scale * d * K * ln T), clamped to [2d, T/4]
  double epsilon_opt = 0;  // optimizer precision; <= 0 = 1e-6 * max(p_upper, 1) per solve
  EstimatorConfig estimator;
  L0Mode l0_mode = L0Mode::kKnown;
  double l0_floor = 0.05;   // floor for the estimated l0
  int mle_refit_every = 1;  // learning rounds between warm-started refits
};

// Initialization length the auto rule produces for this instance.
long resolve_t0(const PolicyConfig& config, const ProblemInstance& instance);

// Offered-price cap for learners and the random baseline:
// price_bound(1, K, l0) + 1/l0.
double price_cap(int assort_cap, double l0);

struct PolicyDiagnostics {
  long t0 = 0;                        // resolved initialization length
  double l0_used = 0.0;               // sensitivity bound in effect (0 until resolved)
  double min_eig_v_init_end = 0.0;    // lambda_min(V) on leaving initialization
  long excluded_items = 0;            // cumulative per-round construction exclusions
  std::size_t record_count = 0;       // retained interaction records
  double last_internal_revenue = 0.0; // optimistic objective of the last solved round
};

// A decision policy. One instance per simulated run; act and update are
// called once per round, in round order, with update receiving the offer
// actually shown and the buyer's choice (position in the offer or
// kOutsideOption). Randomized policies derive their randomness from
// (seed, round) substreams, so replays are bit-identical regardless of
// caller state.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual Offer act(const ContextRound& round) = 0;
  virtual void update(const ContextRound& round, const Offer& offer, int chosen) = 0;
  virtual PolicyDiagnostics diagnostics() const = 0;

  // Learner internals for drills and reporting; null/zero for policies
  // without an estimator.
  virtual const InfoMatrix* info_matrix() const { return nullptr; }
  virtual const ParamVector* theta_hat() const { return nullptr; }
  virtual double alpha_at(long t) const;

  Policy() = default;
  Policy(const Policy&) = delete;
  Policy& operator=(const Policy&) = delete;
};

std::unique_ptr<Policy> make_policy(PolicyKind kind, const ProblemInstance& instance,
                                    const PolicyConfig& config, std::uint64_t seed);

// Round-optimal offer under the true parameters, solved to `epsilon`.
OptimizationResult oracle_solve(const ProblemInstance& instance, const ContextRound& round,
                                double epsilon);

}  // namespace mnl_lab
