#include "mnl_lab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "mnl_lab/errors.hpp"
#include "mnl_lab/estimation.hpp"
#include "mnl_lab/rng.hpp"
#include "mnl_lab/streams.hpp"

namespace mnl_lab {

std::vector<long> checkpoints(long horizon) {
  std::vector<long> out;
  for (long t = 1; t <= horizon && t > 0; t *= 2) {
    out.push_back(t);
  }
  if (out.empty() || out.back() != horizon) {
    out.push_back(horizon);
  }
  return out;
}

RunResult run_single(const RunSpec& spec, std::uint64_t seed) {
  if (spec.gen.horizon < 1) {
    throw ConfigError("run_single: horizon must be at least 1");
  }
  const auto start = std::chrono::steady_clock::now();

  Rng instance_rng = Rng::stream(seed, {streams::kInstance});
  const ProblemInstance instance = generate_instance(spec.gen, seed, instance_rng);
  const std::unique_ptr<Policy> policy =
      make_policy(spec.policy, instance, spec.policy_config, seed);

  // The oracle is solved far tighter than the policy's optimizer so the
  // per-round gap is nonnegative up to the policy's own tolerance.
  const double p0_true = price_bound(0.0, instance.assort_cap, instance.l0);
  double eps_oracle = 1e-9 * std::max(p0_true, 1.0);
  if (spec.policy_config.epsilon_opt > 0.0) {
    eps_oracle = std::min(eps_oracle, spec.policy_config.epsilon_opt);
  }

  const std::vector<long> marks = checkpoints(instance.horizon);
  const Eigen::VectorXd theta_star_flat = instance.theta_star.flat();

  RunResult result;
  result.trace.seed = seed;
  result.trace.run_id = to_string(spec.policy) + "-" + std::to_string(seed);
  result.summary.seed = seed;
  result.summary.run_id = result.trace.run_id;
  result.summary.horizon = instance.horizon;
  result.summary.checkpoints = marks;
  result.summary.cum_regret_at.reserve(marks.size());

  double cum_regret = 0.0;
  long ellipsoid_rounds = 0;
  long ellipsoid_hits = 0;
  std::size_t next_mark = 0;

  for (long t = 1; t <= instance.horizon; ++t) {
    try {
      Rng context_rng = Rng::stream(seed, {streams::kContext, static_cast<std::uint64_t>(t)});
      const ContextRound round = generate_contexts(instance, t, context_rng);

      const Offer offer = policy->act(round);
      const OptimizationResult oracle = oracle_solve(instance, round, eps_oracle);
      const Offer oracle_offer{oracle.assortment, oracle.prices};

      const double optimal_revenue = expected_revenue(oracle_offer, instance.theta_star, round);
      const double policy_revenue = expected_revenue(offer, instance.theta_star, round);

      // Ellipsoid membership of the estimate actually used this round,
      // measured against V before this round's information is added.
      const InfoMatrix* v = policy->info_matrix();
      const ParamVector* theta_hat = policy->theta_hat();
      if (v != nullptr && theta_hat != nullptr) {
        const Eigen::VectorXd diff = theta_hat->flat() - theta_star_flat;
        const double vnorm = std::sqrt(std::max(0.0, diff.dot(v->matrix() * diff)));
        ++ellipsoid_rounds;
        if (vnorm <= policy->alpha_at(t)) {
          ++ellipsoid_hits;
        }
      }

      Rng choice_rng = Rng::stream(seed, {streams::kChoice, static_cast<std::uint64_t>(t)});
      const int chosen = sample_choice(offer, instance.theta_star, round, choice_rng);
      policy->update(round, offer, chosen);

      const double gap = optimal_revenue - policy_revenue;
      cum_regret += std::max(gap, 0.0);

      const bool at_mark = next_mark < marks.size() && marks[next_mark] == t;
      if (spec.trace_level == TraceLevel::kPerRound || at_mark) {
        result.trace.rows.push_back(
            {t, optimal_revenue, policy_revenue, gap, cum_regret, chosen});
      }
      if (at_mark) {
        result.summary.cum_regret_at.push_back(cum_regret);
        ++next_mark;
      }
    } catch (const std::exception& e) {
      throw Error("round " + std::to_string(t) + ": " + e.what());
    }
  }

  const PolicyDiagnostics diag = policy->diagnostics();
  result.summary.t0 = diag.t0;
  result.summary.final_cum_regret = cum_regret;
  result.summary.min_eig_v_init_end = diag.min_eig_v_init_end;
  result.summary.excluded_items = diag.excluded_items;
  result.summary.record_count = diag.record_count;
  result.summary.l0_used = diag.l0_used;
  if (const ParamVector* theta_hat = policy->theta_hat()) {
    result.summary.has_estimator = true;
    result.summary.theta_err_final = (theta_hat->flat() - theta_star_flat).norm();
    result.summary.ellipsoid_freq =
        ellipsoid_rounds > 0
            ? static_cast<double>(ellipsoid_hits) / static_cast<double>(ellipsoid_rounds)
            : 0.0;
  }
  result.summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

BatchResult run_batch(const RunSpec& spec, int n_threads) {
  if (spec.seeds.empty()) {
    throw ConfigError("run_batch: at least one seed required");
  }
  const std::size_t n = spec.seeds.size();
  std::vector<RunResult> slots(n);
  std::vector<std::string> errors(n);
  std::vector<char> failed(n, 0);

  unsigned workers = n_threads > 0 ? static_cast<unsigned>(n_threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));

  std::atomic<std::size_t> cursor{0};
  const auto worker = [&spec, &slots, &errors, &failed, &cursor, n]() {
    for (std::size_t i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
      try {
        slots[i] = run_single(spec, spec.seeds[i]);
      } catch (const std::exception& e) {
        failed[i] = 1;
        errors[i] = e.what();
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back(worker);
    }
    for (std::thread& th : pool) {
      th.join();
    }
  }

  BatchResult batch;
  for (std::size_t i = 0; i < n; ++i) {
    if (failed[i]) {
      batch.failures.push_back({spec.seeds[i], errors[i]});
    } else {
      batch.runs.push_back(std::move(slots[i]));
    }
  }

  batch.aggregate.checkpoints = checkpoints(spec.gen.horizon);
  const std::size_t m = batch.aggregate.checkpoints.size();
  batch.aggregate.mean_cum_regret.assign(m, 0.0);
  batch.aggregate.std_cum_regret.assign(m, 0.0);
  const double count = static_cast<double>(batch.runs.size());
  if (!batch.runs.empty()) {
    for (std::size_t k = 0; k < m; ++k) {
      double mean = 0.0;
      for (const RunResult& run : batch.runs) {
        mean += run.summary.cum_regret_at.at(k);
      }
      mean /= count;
      double var = 0.0;
      for (const RunResult& run : batch.runs) {
        const double d = run.summary.cum_regret_at.at(k) - mean;
        var += d * d;
      }
      batch.aggregate.mean_cum_regret[k] = mean;
      batch.aggregate.std_cum_regret[k] = count > 1.0 ? std::sqrt(var / (count - 1.0)) : 0.0;
    }
  }
  return batch;
}

double fit_slope(const std::vector<long>& ts, const std::vector<double>& cum_regret,
                 long horizon) {
  if (ts.size() != cum_regret.size()) {
    throw ConfigError("fit_slope: mismatched lengths");
  }
  long positive = 0;
  for (double r : cum_regret) {
    if (r > 0.0) {
      ++positive;
    }
  }
  if (positive < 4) {
    throw InsufficientDataError("fit_slope: need at least 4 checkpoints with positive regret");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  const double half = static_cast<double>(horizon) / 2.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (static_cast<double>(ts[i]) >= half && cum_regret[i] > 0.0) {
      xs.push_back(std::log(static_cast<double>(ts[i])));
      ys.push_back(std::log(cum_regret[i]));
    }
  }
  if (xs.size() < 2) {
    throw InsufficientDataError("fit_slope: need at least 2 usable checkpoints in the window");
  }
  double x_mean = 0.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= static_cast<double>(xs.size());
  y_mean /= static_cast<double>(xs.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - x_mean) * (ys[i] - y_mean);
    den += (xs[i] - x_mean) * (xs[i] - x_mean);
  }
  if (den == 0.0) {
    throw InsufficientDataError("fit_slope: degenerate time points");
  }
  return num / den;
}

}  // namespace mnl_lab
