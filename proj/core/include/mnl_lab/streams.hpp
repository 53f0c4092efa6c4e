#pragma once

#include <cstdint>

namespace mnl_lab::streams {

// Purpose tags for per-(run, purpose[, round]) random substreams. Every
// consumer derives its stream as Rng::stream(seed, {tag, ...}), so the
// context sequence, choice noise and policy randomness are independent and
// each round replays standalone.
inline constexpr std::uint64_t kInstance = 1;  // ground-truth parameter draw
inline constexpr std::uint64_t kContext = 2;   // per-round context vectors
inline constexpr std::uint64_t kChoice = 3;    // per-round buyer choice
inline constexpr std::uint64_t kPolicy = 4;    // per-round policy randomness

}  // namespace mnl_lab::streams
