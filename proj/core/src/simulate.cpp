#include "meco/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace meco {

namespace {

// FNV-1a over the canonical field dump; stable across runs and platforms with
// the same double formatting.
std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

SlotState initial_state(const SystemParams& params, const SimOptions& options,
                        UniformStream& cpu_rng, UniformStream& ch_rng) {
  SlotState x;
  x.slot = 1;
  x.cpu = options.initial_cpu
              ? *options.initial_cpu
              : static_cast<CpuState>(sample_stationary(params.cpu_chain, cpu_rng));
  x.channel = options.initial_channel
                  ? *options.initial_channel
                  : static_cast<ChannelState>(sample_stationary(params.channel_chain, ch_rng));
  x.remaining = params.total_bits;
  x.buffered = 0.0;
  return x;
}

Action resolve_action(const SystemParams& params, const Policy& policy,
                      const SlotState& state, const SimOptions& options) {
  Action a = policy.decide(state);
  if (state.slot == params.num_slots && state.cpu == CpuState::Busy) {
    // Demand-computing is the environment's rule, not the policy's choice.
    a = {0.0, state.remaining + state.buffered};
  }
  if (options.round_to_bits) {
    a = round_action_to_grid(params, state, a, options.bit_step);
  }
  require_feasible(params, state, a);
  return a;
}

}  // namespace

std::uint64_t hash_params(const SystemParams& params) {
  char buf[360];
  std::snprintf(buf, sizeof buf,
                "%.17g|%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g",
                params.total_bits, params.num_slots, params.slot_duration,
                params.cycle_energy_coeff, params.cycles_per_bit, params.tx_energy_coeff,
                params.gain_good, params.gain_bad, params.cpu_chain.stay_prob_state0,
                params.cpu_chain.stay_prob_state1, params.channel_chain.stay_prob_state0,
                params.channel_chain.stay_prob_state1, params.buffer_size);
  return fnv1a(buf);
}

EpisodeTrace run_episode(const SystemParams& params, const Policy& policy,
                         std::uint64_t seed, const SimOptions& options) {
  params.validate();
  UniformStream cpu_rng(mix_seed(seed, 0));
  UniformStream ch_rng(mix_seed(seed, 1));

  EpisodeTrace trace;
  trace.seed = seed;
  trace.slots.reserve(static_cast<std::size_t>(params.num_slots));

  SlotState state = initial_state(params, options, cpu_rng, ch_rng);
  for (int k = 1; k <= params.num_slots; ++k) {
    const Action a = resolve_action(params, policy, state, options);
    const double e = slot_cost(params, state, a);
    trace.slots.push_back({state, a, e});
    trace.total_energy += e;
    if (k < params.num_slots) {
      const CpuState cn = sample_next(params.cpu_chain, state.cpu, cpu_rng);
      const ChannelState hn = sample_next(params.channel_chain, state.channel, ch_rng);
      state = transition(params, state, a, cn, hn);
    } else if (state.cpu == CpuState::Busy) {
      trace.demand_computed_bits = state.buffered;
    }
  }
  return trace;
}

EvalReport evaluate(const SystemParams& params, const Policy& policy, int episodes,
                    std::uint64_t base_seed, const SimOptions& options) {
  if (episodes < 1) {
    throw std::invalid_argument("episodes must be >= 1");
  }
  EvalReport report;
  report.policy = std::string(policy.name());
  report.params_hash = hash_params(params);
  report.episodes = episodes;
  report.base_seed = base_seed;

  // Welford accumulation keeps the reduction single-pass and numerically tame.
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < episodes; ++i) {
    const double x =
        run_episode(params, policy, base_seed + static_cast<std::uint64_t>(i), options)
            .total_energy;
    const double delta = x - mean;
    mean += delta / (i + 1);
    m2 += delta * (x - mean);
  }
  report.mean_energy = mean;
  report.stddev_energy = episodes > 1 ? std::sqrt(m2 / (episodes - 1)) : 0.0;
  return report;
}

namespace {

double expected_energy_rec(const SystemParams& params, const Policy& policy,
                           const SlotState& state, const SimOptions& options) {
  const Action a = resolve_action(params, policy, state, options);
  double total = slot_cost(params, state, a);
  if (state.slot == params.num_slots) {
    return total;
  }
  for (int cn = 0; cn < 2; ++cn) {
    const double pc = transition_prob(params.cpu_chain, index_of(state.cpu), cn);
    if (pc == 0.0) continue;
    for (int hn = 0; hn < 2; ++hn) {
      const double ph = transition_prob(params.channel_chain, index_of(state.channel), hn);
      if (ph == 0.0) continue;
      const SlotState next = transition(params, state, a, static_cast<CpuState>(cn),
                                        static_cast<ChannelState>(hn));
      total += pc * ph * expected_energy_rec(params, policy, next, options);
    }
  }
  return total;
}

}  // namespace

double exact_expected_energy(const SystemParams& params, const Policy& policy,
                             CpuState c1, ChannelState h1, const SimOptions& options) {
  params.validate();
  if (params.num_slots > 12) {
    throw std::invalid_argument(
        "exact path enumeration is exponential in the horizon; refusing num_slots > 12");
  }
  SlotState x1;
  x1.slot = 1;
  x1.cpu = c1;
  x1.channel = h1;
  x1.remaining = params.total_bits;
  x1.buffered = 0.0;
  return expected_energy_rec(params, policy, x1, options);
}

double exact_expected_energy(const SystemParams& params, const Policy& policy,
                             const SimOptions& options) {
  const auto pic = stationary_dist(params.cpu_chain);
  const auto pih = stationary_dist(params.channel_chain);
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int h = 0; h < 2; ++h) {
      if (pic[c] == 0.0 || pih[h] == 0.0) continue;
      total += pic[static_cast<std::size_t>(c)] * pih[static_cast<std::size_t>(h)] *
               exact_expected_energy(params, policy, static_cast<CpuState>(c),
                                     static_cast<ChannelState>(h), options);
    }
  }
  return total;
}

double buffer_gain(const SystemParams& params, const Policy& policy_with_buffer,
                   int episodes, std::uint64_t base_seed, const SimOptions& options) {
  SystemParams no_buffer = params;
  no_buffer.buffer_size = 0.0;
  PolicyKind kind;
  kind.name = PolicyName::ZeroBufferOptimal;
  const auto reference = make_policy(no_buffer, kind);

  const double numer =
      evaluate(no_buffer, *reference, episodes, base_seed, options).mean_energy;
  const double denom =
      evaluate(params, policy_with_buffer, episodes, base_seed, options).mean_energy;
  if (denom == 0.0) {
    if (numer == 0.0) {
      return 1.0;
    }
    throw std::domain_error("buffer gain undefined: buffered policy spent no energy");
  }
  return numer / denom;
}

}  // namespace meco
