#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "mnl_lab/rng.hpp"

namespace mnl_lab {

// Marker for the no-purchase alternative. It carries price 0 and utility 0
// and is always available.
inline constexpr int kOutsideOption = -1;

// Extended parameter theta = (psi; phi). Buyer utility for context x at price
// p is <psi, x> - <phi, x> * p.
struct ParamVector {
  Eigen::VectorXd psi;
  Eigen::VectorXd phi;

  ParamVector() = default;
  ParamVector(Eigen::VectorXd psi_in, Eigen::VectorXd phi_in);

  // Splits a flat 2d vector (psi; phi).
  static ParamVector from_flat(const Eigen::VectorXd& flat);

  Eigen::Index dim() const { return psi.size(); }
  Eigen::VectorXd flat() const;
};

// One round's context vectors, one per catalog item.
struct ContextRound {
  std::vector<Eigen::VectorXd> contexts;
  long round = 0;
};

// An assortment of distinct item indices with one price per offered item,
// aligned by position.
struct Offer {
  std::vector<int> items;
  std::vector<double> prices;

  bool empty() const { return items.empty(); }
  std::size_t size() const { return items.size(); }
};

// Instance generator settings.
struct GeneratorConfig {
  int n_items = 0;       // N
  int assort_cap = 0;    // K
  int dim = 0;           // d
  double l0 = 0.0;       // minimum price sensitivity
  long horizon = 0;      // T
};

// Ground truth for a simulated market. The generator guarantees
// ||(psi*, phi*)|| <= 1 and <phi*, x> >= l0 for every context it can emit.
struct ProblemInstance {
  int n_items = 0;
  int assort_cap = 0;
  int dim = 0;
  ParamVector theta_star;
  double l0 = 0.0;
  long horizon = 0;
  std::uint64_t seed = 0;
};

// Entry range for phi* and context entries: [sqrt(l0/d), 1/sqrt(2d)].
// Nonempty iff l0 <= 1/2.
struct EntryInterval {
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
};
EntryInterval entry_interval(int dim, double l0);

// Buyer utility <psi, x> - <phi, x> * p.
double utility(const ParamVector& theta, const Eigen::VectorXd& context, double price);

// Choice distribution over the offered items plus the outside option.
// item[k] aligns with offer.items[k].
struct ChoiceProbabilities {
  std::vector<double> item;
  double outside = 1.0;
};

// MNL probabilities q(i) = exp(u_i) / (1 + sum_j exp(u_j)), computed via
// log-sum-exp over {0, u_1, ..., u_K} so transiently large optimistic
// utilities cannot overflow.
ChoiceProbabilities choice_probabilities(const Offer& offer, const ParamVector& theta,
                                         const ContextRound& round);

// Expected revenue sum_i p_i q(i); 0 for the empty assortment.
double expected_revenue(const Offer& offer, const ParamVector& theta,
                        const ContextRound& round);

// Samples the buyer's choice. Returns the position of the chosen item within
// the offer, or kOutsideOption. The categorical walk visits offered items in
// offer order and the outside option last.
int sample_choice(const Offer& offer, const ParamVector& theta, const ContextRound& round,
                  Rng& rng);

// Draws ground truth: psi* uniform on the sphere of radius 1/2 (normalized
// standard normals), phi* entries i.i.d. uniform on entry_interval(d, l0).
// Throws ConfigError when the interval is empty (l0 > 1/2) or dimensions are
// invalid.
ProblemInstance generate_instance(const GeneratorConfig& config, std::uint64_t seed, Rng& rng);

// Draws the round's context vectors, entries i.i.d. uniform on
// entry_interval(d, l0); every resulting context satisfies ||x|| <= 1/sqrt(2).
ContextRound generate_contexts(const ProblemInstance& instance, long t, Rng& rng);

}  // namespace mnl_lab
