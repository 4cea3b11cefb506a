#pragma once

#include <array>

#include "meco/rng.hpp"

namespace meco {

// Helper-CPU state. Busy encodes c=0 and Idle encodes c=1; the numeric value
// multiplies offload factors in the closed-form policies, so the encoding is
// load-bearing, not cosmetic.
enum class CpuState : int { Busy = 0, Idle = 1 };

// Channel state of the two-state (good/bad) fading model. Bad encodes index 0,
// Good index 1. Power gains live in SystemParams.
enum class ChannelState : int { Bad = 0, Good = 1 };

inline int index_of(CpuState c) { return static_cast<int>(c); }
inline int index_of(ChannelState h) { return static_cast<int>(h); }

// Two-state stationary Markov chain parameterized by its diagonal (stay)
// probabilities; each row of the implied transition matrix is
// [stay, 1 - stay], so rows sum to 1 exactly by construction.
struct TwoStateChain {
  double stay_prob_state0 = 0.5;  // P(next=0 | current=0)
  double stay_prob_state1 = 0.5;  // P(next=1 | current=1)
};

// Entry of the 2x2 transition matrix. Indices must be 0 or 1.
double transition_prob(const TwoStateChain& chain, int from, int to);

// Draws the successor state: stays with the row's stay probability
// (variate < stay), switches otherwise. Deterministic given the stream.
int sample_next(const TwoStateChain& chain, int from, UniformStream& rng);

inline CpuState sample_next(const TwoStateChain& chain, CpuState from,
                            UniformStream& rng) {
  return static_cast<CpuState>(sample_next(chain, index_of(from), rng));
}
inline ChannelState sample_next(const TwoStateChain& chain, ChannelState from,
                                UniformStream& rng) {
  return static_cast<ChannelState>(sample_next(chain, index_of(from), rng));
}

// Stationary distribution (pi0, pi1) with pi0 = (1-stay1)/((1-stay0)+(1-stay1)).
// Throws std::invalid_argument for the doubly-absorbing chain (both stay
// probabilities 1), whose stationary distribution is not unique.
std::array<double, 2> stationary_dist(const TwoStateChain& chain);

// Draws a state index from the stationary distribution.
int sample_stationary(const TwoStateChain& chain, UniformStream& rng);

// Probability-range check; `name` prefixes the error message so callers can
// identify which chain (cpu or channel) was misconfigured.
void validate_chain(const TwoStateChain& chain, const char* name);

}  // namespace meco
