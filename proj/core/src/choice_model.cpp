#include "mnl_lab/choice_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mnl_lab/errors.hpp"
#include "mnl_lab/streams.hpp"

namespace mnl_lab {

ParamVector::ParamVector(Eigen::VectorXd psi_in, Eigen::VectorXd phi_in)
    : psi(std::move(psi_in)), phi(std::move(phi_in)) {
  if (psi.size() != phi.size()) {
    throw ConfigError("ParamVector: psi and phi must have equal dimension");
  }
}

ParamVector ParamVector::from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() % 2 != 0) {
    throw ConfigError("ParamVector::from_flat: flat vector must have even size");
  }
  const Eigen::Index d = flat.size() / 2;
  return ParamVector(flat.head(d), flat.tail(d));
}

Eigen::VectorXd ParamVector::flat() const {
  Eigen::VectorXd out(2 * dim());
  out.head(dim()) = psi;
  out.tail(dim()) = phi;
  return out;
}

EntryInterval entry_interval(int dim, double l0) {
  if (dim <= 0) {
    throw ConfigError("entry_interval: dim must be positive");
  }
  if (!(l0 > 0.0) || l0 > 0.5) {
    throw ConfigError("entry_interval: l0 must lie in (0, 1/2]");
  }
  EntryInterval iv;
  iv.lo = std::sqrt(l0 / dim);
  iv.hi = 1.0 / std::sqrt(2.0 * dim);
  return iv;
}

double utility(const ParamVector& theta, const Eigen::VectorXd& context, double price) {
  return theta.psi.dot(context) - theta.phi.dot(context) * price;
}

ChoiceProbabilities choice_probabilities(const Offer& offer, const ParamVector& theta,
                                         const ContextRound& round) {
  ChoiceProbabilities probs;
  probs.item.resize(offer.size());
  if (offer.empty()) {
    probs.outside = 1.0;
    return probs;
  }

  std::vector<double> u(offer.size());
  double m = 0.0;  // outside option contributes utility 0
  for (std::size_t k = 0; k < offer.size(); ++k) {
    u[k] = utility(theta, round.contexts.at(static_cast<std::size_t>(offer.items[k])),
                   offer.prices[k]);
    m = std::max(m, u[k]);
  }
  double sum = std::exp(-m);  // outside option term
  for (double uk : u) {
    sum += std::exp(uk - m);
  }
  const double lse = m + std::log(sum);
  for (std::size_t k = 0; k < offer.size(); ++k) {
    probs.item[k] = std::exp(u[k] - lse);
  }
  probs.outside = std::exp(-lse);
  return probs;
}

double expected_revenue(const Offer& offer, const ParamVector& theta,
                        const ContextRound& round) {
  const ChoiceProbabilities probs = choice_probabilities(offer, theta, round);
  double rev = 0.0;
  for (std::size_t k = 0; k < offer.size(); ++k) {
    rev += offer.prices[k] * probs.item[k];
  }
  return rev;
}

int sample_choice(const Offer& offer, const ParamVector& theta, const ContextRound& round,
                  Rng& rng) {
  const ChoiceProbabilities probs = choice_probabilities(offer, theta, round);
  const double draw = rng.next_double();
  double cum = 0.0;
  for (std::size_t k = 0; k < offer.size(); ++k) {
    cum += probs.item[k];
    if (draw < cum) {
      return static_cast<int>(k);
    }
  }
  return kOutsideOption;
}

ProblemInstance generate_instance(const GeneratorConfig& config, std::uint64_t seed, Rng& rng) {
  if (config.n_items <= 0 || config.dim <= 0) {
    throw ConfigError("generate_instance: n_items and dim must be positive");
  }
  if (config.assort_cap <= 0 || config.assort_cap > config.n_items) {
    throw ConfigError("generate_instance: assort_cap must lie in [1, n_items]");
  }
  if (config.horizon <= 0) {
    throw ConfigError("generate_instance: horizon must be positive");
  }
  const EntryInterval iv = entry_interval(config.dim, config.l0);

  ProblemInstance inst;
  inst.n_items = config.n_items;
  inst.assort_cap = config.assort_cap;
  inst.dim = config.dim;
  inst.l0 = config.l0;
  inst.horizon = config.horizon;
  inst.seed = seed;

  // psi*: radius-1/2 sphere point from normalized standard normals. A zero
  // draw has probability 0 but would divide by 0, so retry.
  Eigen::VectorXd psi(config.dim);
  double norm = 0.0;
  do {
    for (int j = 0; j < config.dim; ++j) {
      psi[j] = rng.normal();
    }
    norm = psi.norm();
  } while (norm == 0.0);
  psi *= 0.5 / norm;

  Eigen::VectorXd phi(config.dim);
  for (int j = 0; j < config.dim; ++j) {
    phi[j] = rng.uniform(iv.lo, iv.hi);
  }

  inst.theta_star = ParamVector(std::move(psi), std::move(phi));
  return inst;
}

ContextRound generate_contexts(const ProblemInstance& instance, long t, Rng& rng) {
  const EntryInterval iv = entry_interval(instance.dim, instance.l0);
  ContextRound round;
  round.round = t;
  round.contexts.resize(static_cast<std::size_t>(instance.n_items));
  for (int i = 0; i < instance.n_items; ++i) {
    Eigen::VectorXd x(instance.dim);
    for (int j = 0; j < instance.dim; ++j) {
      x[j] = rng.uniform(iv.lo, iv.hi);
    }
    round.contexts[static_cast<std::size_t>(i)] = std::move(x);
  }
  return round;
}

}  // namespace mnl_lab
