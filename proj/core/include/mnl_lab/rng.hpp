#pragma once

#include <cstdint>
#include <initializer_list>

namespace mnl_lab {

// Deterministic, splittable 64-bit generator built on the SplitMix64 step and
// finalizer (Steele, Lea & Flood, "Fast splittable pseudorandom number
// generators", OOPSLA 2014). The generator is a counter: state advances by the
// golden-ratio increment and each output is the SplitMix64 finalizer of the
// new state, so a stream is fully determined by its initial state.
//
// Substreams: stream(seed, {w1, w2, ...}) derives an initial state by
// absorbing each key word through the finalizer,
//
//   s = mix(seed + GAMMA); for each w: s = mix(s ^ mix(w + GAMMA))
//
// which gives every (run, purpose, round) tuple an independent stream. All
// operations are integer based or use round-trip-exact double arithmetic, so
// traces replay bit-identically across platforms.
class Rng {
public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z);

  explicit Rng(std::uint64_t state) : state_(state) {}

  // Derives the substream identified by (seed, key path).
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double next_double();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Unbiased uniform integer on {0, ..., n-1} via modulo rejection. n >= 1.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller (both uniforms drawn every call; no cached
  // spare, which keeps replay independent of call interleaving).
  double normal();

private:
  std::uint64_t state_;
};

}  // namespace mnl_lab
