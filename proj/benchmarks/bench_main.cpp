// Microbenchmarks for the hot paths: the fixed-point optimizer (affine and
// optimistic utilities), batch likelihood fitting, and the online update.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mnl_lab/estimation.hpp"
#include "mnl_lab/optimize.hpp"
#include "mnl_lab/policies.hpp"
#include "mnl_lab/rng.hpp"

namespace {

std::vector<mnl_lab::FixedPointItem> linear_items(int n, std::uint64_t seed) {
  mnl_lab::Rng rng = mnl_lab::Rng::stream(seed, {99});
  std::vector<mnl_lab::FixedPointItem> items;
  items.reserve(n);
  for (int i = 0; i < n; ++i) {
    items.push_back({i, mnl_lab::LinearUtility{rng.uniform(-0.5, 1.0), rng.uniform(0.5, 1.5)}});
  }
  return items;
}

std::vector<mnl_lab::FixedPointItem> conf_items(int n, std::uint64_t seed) {
  mnl_lab::Rng rng = mnl_lab::Rng::stream(seed, {98});
  const double l0 = 0.5;
  std::vector<mnl_lab::FixedPointItem> items;
  items.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double alpha = rng.uniform(-0.5, 1.0);
    const double beta = rng.uniform(0.6, 1.5);
    mnl_lab::BonusCoeffs bonus;
    bonus.c1 = rng.uniform(0.01, 0.3);
    bonus.c3 = rng.uniform(0.001, 0.05);
    bonus.c2 = rng.uniform(-0.9, 0.9) * std::sqrt(bonus.c1 * bonus.c3);
    items.push_back({i, mnl_lab::tighten_utility(alpha, beta, bonus, 0.3, l0)});
  }
  return items;
}

void bm_fixed_point_linear(benchmark::State& state) {
  const auto items = linear_items(static_cast<int>(state.range(0)), 7);
  mnl_lab::FixedPointConfig cfg;
  cfg.p_upper = mnl_lab::price_bound(0.0, 4, 0.5);
  cfg.epsilon = 1e-6 * std::max(cfg.p_upper, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mnl_lab::fixed_point_solve(items, 4, cfg));
  }
}
BENCHMARK(bm_fixed_point_linear)->Arg(5)->Arg(20)->Arg(100);

void bm_fixed_point_conf(benchmark::State& state) {
  const auto items = conf_items(static_cast<int>(state.range(0)), 11);
  mnl_lab::FixedPointConfig cfg;
  cfg.p_upper = mnl_lab::price_bound(0.0, 4, 0.5);
  cfg.epsilon = 1e-6 * std::max(cfg.p_upper, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mnl_lab::fixed_point_solve(items, 4, cfg));
  }
}
BENCHMARK(bm_fixed_point_conf)->Arg(5)->Arg(20);

std::vector<mnl_lab::InteractionRecord> synthetic_records(int rounds, int dim,
                                                          std::uint64_t seed) {
  mnl_lab::GeneratorConfig gen;
  gen.n_items = 10;
  gen.assort_cap = 4;
  gen.dim = dim;
  gen.l0 = 0.3;
  gen.horizon = rounds;
  mnl_lab::Rng inst_rng = mnl_lab::Rng::stream(seed, {1});
  const mnl_lab::ProblemInstance inst = mnl_lab::generate_instance(gen, seed, inst_rng);
  mnl_lab::Rng ctx_rng = mnl_lab::Rng::stream(seed, {2});
  mnl_lab::Rng choice_rng = mnl_lab::Rng::stream(seed, {3});
  mnl_lab::Rng price_rng = mnl_lab::Rng::stream(seed, {4});

  std::vector<mnl_lab::InteractionRecord> records;
  records.reserve(rounds);
  for (int t = 0; t < rounds; ++t) {
    const mnl_lab::ContextRound round = mnl_lab::generate_contexts(inst, t, ctx_rng);
    mnl_lab::Offer offer;
    for (int i = 0; i < gen.assort_cap; ++i) {
      offer.items.push_back(i);
      offer.prices.push_back(price_rng.uniform(1.0, 2.0));
    }
    mnl_lab::InteractionRecord rec;
    for (std::size_t k = 0; k < offer.items.size(); ++k) {
      rec.features.push_back(
          mnl_lab::make_extended(round.contexts[offer.items[k]], offer.prices[k]));
    }
    rec.chosen = mnl_lab::sample_choice(offer, inst.theta_star, round, choice_rng);
    records.push_back(std::move(rec));
  }
  return records;
}

void bm_mle_fit(benchmark::State& state) {
  const int rounds = static_cast<int>(state.range(0));
  const int dim = 5;
  const auto records = synthetic_records(rounds, dim, 21);
  const mnl_lab::EstimatorConfig cfg;
  const mnl_lab::ParamVector start(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mnl_lab::mle_fit(records, cfg, start));
  }
}
BENCHMARK(bm_mle_fit)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void bm_ons_update(benchmark::State& state) {
  const int dim = 5;
  const auto records = synthetic_records(64, dim, 23);
  const double gamma = 0.05;
  mnl_lab::InfoMatrix v(2 * dim);
  mnl_lab::ParamVector theta(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim));
  const mnl_lab::ParamVector theta0 = theta;
  for (const auto& rec : records) {
    v.add_sym(mnl_lab::fisher_matrix(rec, theta));
  }
  std::size_t idx = 0;
  for (auto _ : state) {
    const Eigen::VectorXd g = mnl_lab::per_round_grad(records[idx], theta);
    theta = mnl_lab::ons_update(theta, g, v, theta0, gamma);
    idx = (idx + 1) % records.size();
    benchmark::DoNotOptimize(theta.psi);
  }
}
BENCHMARK(bm_ons_update);

}  // namespace

BENCHMARK_MAIN();
