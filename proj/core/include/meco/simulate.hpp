#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meco/policies.hpp"

namespace meco {

struct SimOptions {
  // Map analytic bit splits onto the integer grid before acting (the physical
  // system moves whole bits). Disable for exact-arithmetic checks such as the
  // cubic-homogeneity properties.
  bool round_to_bits = true;
  double bit_step = 1.0;
  // Fixed initial states instead of stationary draws, for sensitivity checks.
  std::optional<CpuState> initial_cpu;
  std::optional<ChannelState> initial_channel;
};

struct SlotRecord {
  SlotState state;
  Action action;
  double energy = 0.0;  // joules spent in this slot
};

struct EpisodeTrace {
  std::vector<SlotRecord> slots;
  // Buffered bits the user had to recompute locally because the helper was
  // busy at the deadline; 0 whenever the final slot found it idle. The bit
  // ledger across a trace is sum(u_of + u_lo) = total_bits + this.
  double demand_computed_bits = 0.0;
  double total_energy = 0.0;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::string policy;
  std::uint64_t params_hash = 0;
  int episodes = 0;
  double mean_energy = 0.0;
  double stddev_energy = 0.0;  // sample (n-1) standard deviation
  std::uint64_t base_seed = 0;
};

// Stable fingerprint of a parameter set, recorded in reports so result rows
// can be traced back to the exact configuration that produced them.
std::uint64_t hash_params(const SystemParams& params);

// Plays one episode: initial (cpu, channel) drawn from the stationary
// distributions (or pinned via options), workload starts at total_bits with an
// empty buffer; each slot asks the policy, enforces demand-computing at the
// deadline, validates feasibility, accrues energy, and steps the chains on
// disjoint RNG sub-streams derived from `seed`.
EpisodeTrace run_episode(const SystemParams& params, const Policy& policy,
                         std::uint64_t seed, const SimOptions& options = {});

// Monte Carlo estimate over `episodes` runs seeded base_seed..base_seed+n-1.
// Deterministic for fixed inputs; identical seed lists give identical chain
// realizations across policies (common random numbers).
EvalReport evaluate(const SystemParams& params, const Policy& policy, int episodes,
                    std::uint64_t base_seed, const SimOptions& options = {});

// Exact expectation of the policy's total energy by weighted enumeration of
// every (cpu, channel) path — 4^(K-1) branches, guarded for K <= 12. The
// noise-free reference the Monte Carlo path is tested against.
double exact_expected_energy(const SystemParams& params, const Policy& policy,
                             CpuState c1, ChannelState h1, const SimOptions& options = {});

// Same, averaged over the stationary initial-state distribution.
double exact_expected_energy(const SystemParams& params, const Policy& policy,
                             const SimOptions& options = {});

// Energy ratio of the no-buffer optimum to `policy_with_buffer` at the
// configured buffer, under common random numbers. Values above 1 quantify how
// much the buffer helps. Throws on a zero denominator with a nonzero
// numerator.
double buffer_gain(const SystemParams& params, const Policy& policy_with_buffer,
                   int episodes, std::uint64_t base_seed, const SimOptions& options = {});

}  // namespace meco
