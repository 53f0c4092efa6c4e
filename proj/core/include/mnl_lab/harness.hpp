#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mnl_lab/choice_model.hpp"
#include "mnl_lab/policies.hpp"

namespace mnl_lab {

enum class TraceLevel { kSummary, kPerRound };

// Everything needed to reproduce a batch: instance geometry, policy and its
// knobs, seeds, and how much trace to keep.
struct RunSpec {
  GeneratorConfig gen;
  PolicyKind policy = PolicyKind::kCap;
  PolicyConfig policy_config;
  std::vector<std::uint64_t> seeds;
  TraceLevel trace_level = TraceLevel::kSummary;
};

struct TraceRow {
  long t = 0;
  double optimal_revenue = 0.0;  // expected revenue of the oracle offer under theta*
  double policy_revenue = 0.0;   // expected revenue of the policy offer under theta*
  double gap = 0.0;              // optimal - policy, raw (may be a hair negative)
  double cum_regret = 0.0;       // running sum of max(gap, 0)
  int chosen = kOutsideOption;   // realized choice (position in the offer)
};

// Checkpoint rows (trace_level summary) or every round (per_round).
struct RegretTrace {
  std::string run_id;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::string run_id;
  long horizon = 0;
  long t0 = 0;  // 0 for policies without an initialization phase
  double final_cum_regret = 0.0;
  std::vector<long> checkpoints;          // ascending, powers of two plus T
  std::vector<double> cum_regret_at;      // aligned with checkpoints
  double wall_seconds = 0.0;
  // Learner diagnostics; meaningful only when has_estimator.
  bool has_estimator = false;
  double min_eig_v_init_end = 0.0;        // lambda_min(V) at the end of initialization
  double theta_err_final = 0.0;           // ||theta_hat_T - theta*||
  double ellipsoid_freq = 0.0;            // share of learning rounds with ||theta_hat-theta*||_V <= alpha_t
  long excluded_items = 0;
  std::size_t record_count = 0;
  double l0_used = 0.0;
};

struct RunResult {
  RegretTrace trace;
  RunSummary summary;
};

struct SeedFailure {
  std::uint64_t seed = 0;
  std::string message;
};

struct BatchAggregate {
  std::vector<long> checkpoints;
  std::vector<double> mean_cum_regret;
  std::vector<double> std_cum_regret;  // sample standard deviation; 0 for a single run
};

struct BatchResult {
  std::vector<RunResult> runs;  // successful runs, in input seed order
  std::vector<SeedFailure> failures;
  BatchAggregate aggregate;
};

// Powers of two up to horizon, plus the horizon itself.
std::vector<long> checkpoints(long horizon);

// One fully deterministic simulated run: per round, draw contexts, let the
// policy act, score both the policy offer and a high-precision oracle offer
// by expected revenue under theta*, sample the buyer's choice, update the
// policy. Regret accumulates clamped per-round gaps. Errors from the policy
// or optimizer are rethrown with the round index attached.
RunResult run_single(const RunSpec& spec, std::uint64_t seed);

// Independent per-seed runs distributed over a thread pool (n_threads = 0
// picks the hardware concurrency). Results and aggregates are assembled in
// input seed order, so thread count cannot change any output. Failed seeds
// are collected, not fatal.
BatchResult run_batch(const RunSpec& spec, int n_threads = 0);

// Least-squares slope of log(cum_regret) vs log(t) over the checkpoints in
// the second half of the horizon (t >= horizon/2). Requires at least 4
// checkpoints with positive regret overall and 2 usable points in the
// window; throws InsufficientDataError otherwise.
double fit_slope(const std::vector<long>& ts, const std::vector<double>& cum_regret,
                 long horizon);

}  // namespace mnl_lab
