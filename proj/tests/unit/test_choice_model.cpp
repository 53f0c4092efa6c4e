#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mnl_lab/choice_model.hpp"
#include "mnl_lab/errors.hpp"
#include "mnl_lab/rng.hpp"
#include "mnl_lab/streams.hpp"

using namespace mnl_lab;

namespace {

ParamVector theta_of(std::initializer_list<double> psi, std::initializer_list<double> phi) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(psi.size()));
  Eigen::VectorXd q(static_cast<Eigen::Index>(phi.size()));
  Eigen::Index i = 0;
  for (double v : psi) p[i++] = v;
  i = 0;
  for (double v : phi) q[i++] = v;
  return ParamVector(std::move(p), std::move(q));
}

ContextRound round_of(std::vector<Eigen::VectorXd> contexts) {
  ContextRound r;
  r.contexts = std::move(contexts);
  r.round = 0;
  return r;
}

}  // namespace

TEST_CASE("param vector splits and rebuilds its flat form") {
  Eigen::VectorXd flat(4);
  flat << 1.0, 2.0, 3.0, 4.0;
  const ParamVector theta = ParamVector::from_flat(flat);
  CHECK(theta.dim() == 2);
  CHECK(theta.psi[0] == 1.0);
  CHECK(theta.psi[1] == 2.0);
  CHECK(theta.phi[0] == 3.0);
  CHECK(theta.phi[1] == 4.0);
  CHECK((theta.flat() - flat).norm() == 0.0);

  Eigen::VectorXd odd(3);
  odd << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(ParamVector::from_flat(odd), ConfigError);
}

TEST_CASE("utility is the affine form in price") {
  Eigen::VectorXd x(1);
  x << 1.0;

  SUBCASE("zero parameters give zero at any price") {
    CHECK(utility(theta_of({0.0}, {0.0}), x, 3.0) == 0.0);
  }
  SUBCASE("intercept and slope cancel") {
    CHECK(utility(theta_of({1.0}, {1.0}), x, 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("hand arithmetic") {
    CHECK(utility(theta_of({0.4}, {0.2}), x, 1.5) == doctest::Approx(0.1));
  }
}

TEST_CASE("choice probabilities match the closed forms") {
  Eigen::VectorXd x(1);
  x << 1.0;
  const ContextRound round = round_of({x, x});

  SUBCASE("two items at zero utility split into thirds") {
    Offer offer;
    offer.items = {0, 1};
    offer.prices = {0.0, 0.0};
    const ChoiceProbabilities q = choice_probabilities(offer, theta_of({0.0}, {0.0}), round);
    CHECK(q.item[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(q.item[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(q.outside == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }
  SUBCASE("single item at zero utility is a coin flip") {
    Offer offer;
    offer.items = {0};
    offer.prices = {0.0};
    const ChoiceProbabilities q = choice_probabilities(offer, theta_of({0.0}, {0.0}), round);
    CHECK(q.item[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(q.outside == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("single item at utility one") {
    Offer offer;
    offer.items = {0};
    offer.prices = {0.0};
    const ChoiceProbabilities q = choice_probabilities(offer, theta_of({1.0}, {0.0}), round);
    const double e = std::exp(1.0);
    CHECK(q.item[0] == doctest::Approx(e / (1 + e)).epsilon(1e-12));
    CHECK(q.outside == doctest::Approx(1 / (1 + e)).epsilon(1e-12));
  }
}

TEST_CASE("probabilities sum to one and stay positive, log-space matches naive") {
  Rng rng = Rng::stream(5, {100});
  Eigen::VectorXd x(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Eigen::VectorXd> ctx;
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd xi(3);
      for (int j = 0; j < 3; ++j) xi[j] = rng.uniform(-1.0, 1.0);
      ctx.push_back(xi);
    }
    const ContextRound round = round_of(ctx);
    const ParamVector theta =
        theta_of({rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)},
                 {rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)});
    Offer offer;
    offer.items = {0, 1, 2, 3};
    offer.prices = {rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)};

    const ChoiceProbabilities q = choice_probabilities(offer, theta, round);
    double total = q.outside;
    REQUIRE(q.outside > 0.0);
    double naive_denom = 1.0;
    for (std::size_t k = 0; k < offer.items.size(); ++k) {
      naive_denom += std::exp(utility(theta, ctx[offer.items[k]], offer.prices[k]));
    }
    for (std::size_t k = 0; k < offer.items.size(); ++k) {
      REQUIRE(q.item[k] > 0.0);
      total += q.item[k];
      const double naive =
          std::exp(utility(theta, ctx[offer.items[k]], offer.prices[k])) / naive_denom;
      CHECK(q.item[k] == doctest::Approx(naive).epsilon(1e-10));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("log-sum-exp guards huge optimistic utilities") {
  Eigen::VectorXd x(1);
  x << 1.0;
  Offer offer;
  offer.items = {0};
  offer.prices = {0.0};
  const ChoiceProbabilities q =
      choice_probabilities(offer, theta_of({700.0}, {0.0}), round_of({x}));
  CHECK(std::isfinite(q.item[0]));
  CHECK(q.item[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.outside >= 0.0);
}

TEST_CASE("expected revenue closed forms and permutation invariance") {
  Eigen::VectorXd x(1);
  x << 1.0;

  SUBCASE("empty assortment earns nothing") {
    CHECK(expected_revenue(Offer{}, theta_of({0.0}, {0.0}), round_of({x})) == 0.0);
  }
  SUBCASE("single item, zero utility, unit price") {
    Offer offer;
    offer.items = {0};
    offer.prices = {1.0};
    CHECK(expected_revenue(offer, theta_of({1.0}, {1.0}), round_of({x})) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("near-optimal single item price from the closed form") {
    Offer offer;
    offer.items = {0};
    offer.prices = {1.5671};
    const double r = expected_revenue(offer, theta_of({1.0}, {1.0}), round_of({x}));
    CHECK(r == doctest::Approx(0.5671).epsilon(1e-3));
  }
  SUBCASE("item order does not change revenue") {
    Eigen::VectorXd y(1);
    y << 0.5;
    const ContextRound round = round_of({x, y});
    const ParamVector theta = theta_of({0.8}, {0.6});
    Offer ab, ba;
    ab.items = {0, 1};
    ab.prices = {1.0, 2.0};
    ba.items = {1, 0};
    ba.prices = {2.0, 1.0};
    CHECK(expected_revenue(ab, theta, round) ==
          doctest::Approx(expected_revenue(ba, theta, round)).epsilon(1e-14));
  }
}

TEST_CASE("sampled choices are deterministic and follow the distribution") {
  Eigen::VectorXd x(1);
  x << 1.0;
  const ContextRound round = round_of({x, x});
  const ParamVector theta = theta_of({0.5}, {0.3});
  Offer offer;
  offer.items = {0, 1};
  offer.prices = {1.0, 2.0};

  SUBCASE("same stream replays the same picks") {
    Rng a = Rng::stream(9, {streams::kChoice, 3});
    Rng b = Rng::stream(9, {streams::kChoice, 3});
    for (int i = 0; i < 200; ++i) {
      CHECK(sample_choice(offer, theta, round, a) == sample_choice(offer, theta, round, b));
    }
  }
  SUBCASE("a saturated item is always chosen") {
    Rng r = Rng::stream(10, {streams::kChoice});
    Offer solo;
    solo.items = {0};
    solo.prices = {0.0};
    const ParamVector sat = theta_of({40.0}, {0.0});
    for (int i = 0; i < 50; ++i) {
      CHECK(sample_choice(solo, sat, round, r) == 0);
    }
  }
  SUBCASE("empirical frequencies track the probabilities within 3 sigma") {
    const ChoiceProbabilities q = choice_probabilities(offer, theta, round);
    Rng r = Rng::stream(11, {streams::kChoice});
    const int n = 100000;
    std::vector<int> counts(3, 0);  // item 0, item 1, outside
    for (int i = 0; i < n; ++i) {
      const int pick = sample_choice(offer, theta, round, r);
      ++counts[pick == kOutsideOption ? 2 : pick];
    }
    const std::vector<double> probs = {q.item[0], q.item[1], q.outside};
    for (int j = 0; j < 3; ++j) {
      const double freq = static_cast<double>(counts[j]) / n;
      const double sigma = std::sqrt(probs[j] * (1 - probs[j]) / n);
      CHECK(std::abs(freq - probs[j]) <= 3.0 * sigma);
    }
  }
}

TEST_CASE("entry interval endpoints and the feasibility edge") {
  const EntryInterval iv = entry_interval(2, 0.5);
  CHECK(iv.lo == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(iv.hi == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(entry_interval(2, 0.51), ConfigError);
  CHECK_THROWS_AS(entry_interval(2, 0.0), ConfigError);
}

TEST_CASE("generated instances satisfy the model assumptions") {
  GeneratorConfig gen;
  gen.n_items = 6;
  gen.assort_cap = 3;
  gen.dim = 5;
  gen.l0 = 0.25;
  gen.horizon = 100;

  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    Rng rng = Rng::stream(seed, {streams::kInstance});
    const ProblemInstance inst = generate_instance(gen, seed, rng);
    CHECK(inst.theta_star.psi.norm() == doctest::Approx(0.5).epsilon(1e-12));
    const double theta_norm = inst.theta_star.flat().norm();
    CHECK(theta_norm <= 1.0 + 1e-12);
    const EntryInterval iv = entry_interval(gen.dim, gen.l0);
    for (int j = 0; j < gen.dim; ++j) {
      CHECK(inst.theta_star.phi[j] >= iv.lo - 1e-15);
      CHECK(inst.theta_star.phi[j] <= iv.hi + 1e-15);
    }

    Rng ctx_rng = Rng::stream(seed, {streams::kContext});
    for (long t = 0; t < 50; ++t) {
      const ContextRound round = generate_contexts(inst, t, ctx_rng);
      REQUIRE(static_cast<int>(round.contexts.size()) == gen.n_items);
      for (const Eigen::VectorXd& x : round.contexts) {
        CHECK(x.norm() <= 1.0 / std::sqrt(2.0) + 1e-12);
        CHECK(inst.theta_star.phi.dot(x) >= gen.l0 - 1e-12);
      }
    }
  }
}

TEST_CASE("degenerate interval collapses phi and contexts to a point") {
  GeneratorConfig gen;
  gen.n_items = 2;
  gen.assort_cap = 1;
  gen.dim = 1;
  gen.l0 = 0.5;
  gen.horizon = 10;
  Rng rng = Rng::stream(7, {streams::kInstance});
  const ProblemInstance inst = generate_instance(gen, 7, rng);
  CHECK(inst.theta_star.phi[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  GeneratorConfig gen2 = gen;
  gen2.dim = 2;
  Rng rng2 = Rng::stream(8, {streams::kInstance});
  const ProblemInstance inst2 = generate_instance(gen2, 8, rng2);
  Rng ctx_rng = Rng::stream(8, {streams::kContext});
  const ContextRound round = generate_contexts(inst2, 0, ctx_rng);
  for (const Eigen::VectorXd& x : round.contexts) {
    CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("context entry means sit near the interval midpoint") {
  GeneratorConfig gen;
  gen.n_items = 4;
  gen.assort_cap = 2;
  gen.dim = 3;
  gen.l0 = 0.1;
  gen.horizon = 10;
  Rng rng = Rng::stream(12, {streams::kInstance});
  const ProblemInstance inst = generate_instance(gen, 12, rng);
  const EntryInterval iv = entry_interval(gen.dim, gen.l0);

  Rng ctx_rng = Rng::stream(12, {streams::kContext});
  double sum = 0.0;
  long count = 0;
  for (long t = 0; t < 1000; ++t) {
    const ContextRound round = generate_contexts(inst, t, ctx_rng);
    for (const Eigen::VectorXd& x : round.contexts) {
      sum += x.sum();
      count += x.size();
    }
  }
  const double width = iv.hi - iv.lo;
  const double sigma = width / std::sqrt(12.0) / std::sqrt(static_cast<double>(count));
  CHECK(std::abs(sum / count - iv.midpoint()) <= 3.0 * sigma);
}

TEST_CASE("instance generation rejects invalid configurations") {
  GeneratorConfig gen;
  gen.n_items = 2;
  gen.assort_cap = 3;  // cap exceeds catalog
  gen.dim = 2;
  gen.l0 = 0.2;
  gen.horizon = 10;
  Rng rng = Rng::stream(1, {streams::kInstance});
  CHECK_THROWS_AS(generate_instance(gen, 1, rng), ConfigError);

  gen.assort_cap = 1;
  gen.l0 = 0.7;  // interval empty
  CHECK_THROWS_AS(generate_instance(gen, 1, rng), ConfigError);
}
