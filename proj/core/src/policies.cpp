#include "meco/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace meco {

namespace {

double cube(double x) { return x * x * x; }

void require_last_slot(const SystemParams& params, const SlotState& state, const char* who) {
  if (state.slot != params.num_slots) {
    throw std::invalid_argument(std::string(who) + " applies to the deadline slot only, got slot " +
                                std::to_string(state.slot) + " of " +
                                std::to_string(params.num_slots));
  }
}

// Single-slot split of `budget` for an idle helper: u_lo = budget/(1+rho) with
// rho = sqrt(alpha*h/lambda); the busy helper keeps everything local.
Action single_slot_split(const SystemParams& params, CpuState c, ChannelState h,
                         double budget) {
  if (budget <= 0.0) {
    return {};
  }
  if (c == CpuState::Busy) {
    return {0.0, budget};
  }
  const double rho = params.offload_ratio() * std::sqrt(params.gain(h));
  const double u_lo = budget / (1.0 + rho);
  return {budget - u_lo, u_lo};
}

}  // namespace

Action last_slot_zero_buffer(const SystemParams& params, const SlotState& state) {
  require_last_slot(params, state, "last_slot_zero_buffer");
  return single_slot_split(params, state.cpu, state.channel, std::max(0.0, state.remaining));
}

Action zero_buffer_policy(const SystemParams& params, const STable& s, const SlotState& state) {
  if (state.remaining <= 0.0) {
    return {};
  }
  const double rho = index_of(state.cpu) * params.offload_ratio() *
                     std::sqrt(params.gain(state.channel));
  const double inv = s.inv_sqrt(state.slot, state.cpu, state.channel);
  const double u_lo = state.remaining / (1.0 + inv + rho);
  return {rho * u_lo, u_lo};
}

double expected_energy_zero_buffer(const SystemParams& params, const STable& s,
                                   const SlotState& x1) {
  if (x1.slot != 1 || x1.buffered != 0.0 || x1.remaining != params.total_bits) {
    throw std::invalid_argument(
        "expected_energy_zero_buffer wants the initial state (slot 1, full workload, empty buffer)");
  }
  const double rho = index_of(x1.cpu) * params.offload_ratio() *
                     std::sqrt(params.gain(x1.channel));
  const double inv = s.inv_sqrt(1, x1.cpu, x1.channel);
  const double denom = 1.0 + inv + rho;
  return params.alpha() * cube(params.total_bits) / (denom * denom);
}

Action last_slot_large_buffer(const SystemParams& params, const SlotState& state) {
  require_last_slot(params, state, "last_slot_large_buffer");
  if (state.cpu == CpuState::Busy) {
    const double all = state.remaining + state.buffered;
    return all > 0.0 ? Action{0.0, all} : Action{};
  }
  // Idle helper: the buffer drains on its own; only L needs splitting.
  return single_slot_split(params, state.cpu, state.channel, std::max(0.0, state.remaining));
}

Action large_buffer_policy(const SystemParams& params, const STable& s_tilde,
                           const VTable& v, const SlotState& state) {
  if (state.slot == params.num_slots) {
    return last_slot_large_buffer(params, state);
  }
  const double V = v.value(state.slot, state.cpu);
  const double weighted = state.remaining + V * state.buffered;
  if (weighted <= 0.0) {
    return {};
  }
  const double h = params.gain(state.channel);
  const double keep = 1.0 - V;
  const double denom = 1.0 + s_tilde.inv_sqrt(state.slot, state.cpu, state.channel) +
                       params.offload_ratio() * keep * std::sqrt(keep) * std::sqrt(h);
  const double u_lo = weighted / denom;
  const double u_of = std::sqrt(params.alpha() / params.lambda() * h * keep) * u_lo;

  // The closed form can overrun the per-slot data cap when the buffered load
  // dominates a small remaining workload; scale both components down together
  // so the cap binds exactly and the offload/local ratio is untouched.
  const double total = u_of + u_lo;
  if (total > state.remaining) {
    const double scale = std::max(0.0, state.remaining) / total;
    return {u_of * scale, u_lo * scale};
  }
  return {u_of, u_lo};
}

double last_slot_cost_lower_bound(const SystemParams& params, const SlotState& state,
                                  const Action& action) {
  if (state.slot != params.num_slots - 1) {
    throw std::invalid_argument(
        "last_slot_cost_lower_bound applies one slot before the deadline, got slot " +
        std::to_string(state.slot));
  }
  const double V = (1.0 - index_of(state.cpu)) * params.cpu_chain.stay_prob_state0;
  const double base = (state.remaining - action.local - action.offload) +
                      V * (state.buffered + action.offload);
  const double f = cube(std::max(0.0, base));
  return params.alpha() * f * single_step_s(params, state.cpu, state.channel);
}

Action tlbp_policy(const SystemParams& params, const STable& s_tilde, const VTable& v,
                   const SlotState& state) {
  Action a = large_buffer_policy(params, s_tilde, v, state);
  if (state.cpu == CpuState::Busy && state.slot < params.num_slots) {
    const double headroom = std::max(0.0, params.buffer_size - state.buffered);
    a.offload = std::clamp(a.offload, 0.0, headroom);
  }
  return a;
}

Action zbp_policy(const SystemParams& params, const STable& s, const SlotState& state) {
  if (state.slot == params.num_slots) {
    // The runtime demand-computing override supplies the buffered bits when
    // busy; the rule itself only ever schedules the remaining workload.
    return last_slot_zero_buffer(params, state);
  }
  return zero_buffer_policy(params, s, state);
}

Action bacs_policy(const SystemParams& params, double q_threshold, const STable& s,
                   const STable& s_tilde, const VTable& v, const SlotState& state) {
  if (params.buffer_size >= q_threshold) {
    return tlbp_policy(params, s_tilde, v, state);
  }
  return zbp_policy(params, s, state);
}

Action equal_allocation_policy(const SystemParams& params, const SlotState& state) {
  if (state.slot == params.num_slots) {
    if (state.cpu == CpuState::Busy) {
      const double all = state.remaining + state.buffered;
      return all > 0.0 ? Action{0.0, all} : Action{};
    }
    return single_slot_split(params, state.cpu, state.channel, std::max(0.0, state.remaining));
  }
  const double share = params.total_bits / params.num_slots;
  const double budget = std::min(share, state.remaining);
  Action a = single_slot_split(params, state.cpu, state.channel, budget);
  if (state.cpu == CpuState::Busy) {
    a.offload = std::min(a.offload, std::max(0.0, params.buffer_size - state.buffered));
  }
  return a;
}

PolicyName parse_policy_name(std::string_view name) {
  if (name == "zero-opt") return PolicyName::ZeroBufferOptimal;
  if (name == "large-sub") return PolicyName::LargeBufferSubOpt;
  if (name == "tlbp") return PolicyName::Tlbp;
  if (name == "zbp") return PolicyName::Zbp;
  if (name == "bacs") return PolicyName::Bacs;
  if (name == "equal") return PolicyName::EqualAllocation;
  if (name == "dp") return PolicyName::DpTable;
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "' (expected zero-opt|large-sub|tlbp|zbp|bacs|equal|dp)");
}

std::string_view policy_name_string(PolicyName name) {
  switch (name) {
    case PolicyName::ZeroBufferOptimal: return "zero-opt";
    case PolicyName::LargeBufferSubOpt: return "large-sub";
    case PolicyName::Tlbp: return "tlbp";
    case PolicyName::Zbp: return "zbp";
    case PolicyName::Bacs: return "bacs";
    case PolicyName::EqualAllocation: return "equal";
    case PolicyName::DpTable: return "dp";
  }
  throw std::invalid_argument("unhandled policy name");
}

namespace {

class ZeroBufferOptimalPolicy final : public Policy {
 public:
  explicit ZeroBufferOptimalPolicy(const SystemParams& params)
      : params_(params), s_(build_s_table_zero_buffer(params)) {}
  Action decide(const SlotState& state) const override {
    return zero_buffer_policy(params_, s_, state);
  }
  std::string_view name() const override { return "zero-opt"; }

 private:
  SystemParams params_;
  STable s_;
};

class LargeBufferPolicy final : public Policy {
 public:
  explicit LargeBufferPolicy(const SystemParams& params)
      : params_(params),
        v_(build_v_table(params)),
        s_tilde_(build_s_tilde_table(params, v_)) {}
  Action decide(const SlotState& state) const override {
    return large_buffer_policy(params_, s_tilde_, v_, state);
  }
  std::string_view name() const override { return "large-sub"; }

 private:
  SystemParams params_;
  VTable v_;
  STable s_tilde_;
};

class TlbpPolicy final : public Policy {
 public:
  explicit TlbpPolicy(const SystemParams& params)
      : params_(params),
        v_(build_v_table(params)),
        s_tilde_(build_s_tilde_table(params, v_)) {}
  Action decide(const SlotState& state) const override {
    return tlbp_policy(params_, s_tilde_, v_, state);
  }
  std::string_view name() const override { return "tlbp"; }

 private:
  SystemParams params_;
  VTable v_;
  STable s_tilde_;
};

class ZbpPolicy final : public Policy {
 public:
  explicit ZbpPolicy(const SystemParams& params)
      : params_(params), s_(build_s_table_zero_buffer(params)) {}
  Action decide(const SlotState& state) const override {
    return zbp_policy(params_, s_, state);
  }
  std::string_view name() const override { return "zbp"; }

 private:
  SystemParams params_;
  STable s_;
};

class BacsPolicy final : public Policy {
 public:
  BacsPolicy(const SystemParams& params, double threshold)
      : delegate_(params.buffer_size >= threshold
                      ? std::unique_ptr<Policy>(new TlbpPolicy(params))
                      : std::unique_ptr<Policy>(new ZbpPolicy(params))) {}
  Action decide(const SlotState& state) const override { return delegate_->decide(state); }
  std::string_view name() const override { return "bacs"; }

 private:
  std::unique_ptr<Policy> delegate_;
};

class EqualAllocationPolicy final : public Policy {
 public:
  explicit EqualAllocationPolicy(const SystemParams& params) : params_(params) {}
  Action decide(const SlotState& state) const override {
    return equal_allocation_policy(params_, state);
  }
  std::string_view name() const override { return "equal"; }

 private:
  SystemParams params_;
};

class DpTablePolicy final : public Policy {
 public:
  explicit DpTablePolicy(std::shared_ptr<const DpSolution> solution)
      : solution_(std::move(solution)) {}
  Action decide(const SlotState& state) const override { return dp_query(*solution_, state); }
  std::string_view name() const override { return "dp"; }

 private:
  std::shared_ptr<const DpSolution> solution_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(const SystemParams& params, const PolicyKind& kind) {
  params.validate();
  switch (kind.name) {
    case PolicyName::ZeroBufferOptimal:
      return std::make_unique<ZeroBufferOptimalPolicy>(params);
    case PolicyName::LargeBufferSubOpt:
      return std::make_unique<LargeBufferPolicy>(params);
    case PolicyName::Tlbp:
      return std::make_unique<TlbpPolicy>(params);
    case PolicyName::Zbp:
      return std::make_unique<ZbpPolicy>(params);
    case PolicyName::Bacs:
      if (kind.bacs_threshold < 0.0 || kind.bacs_threshold > params.total_bits) {
        throw std::invalid_argument("bacs threshold " + std::to_string(kind.bacs_threshold) +
                                    " outside [0, total_bits]");
      }
      return std::make_unique<BacsPolicy>(params, kind.bacs_threshold);
    case PolicyName::EqualAllocation:
      return std::make_unique<EqualAllocationPolicy>(params);
    case PolicyName::DpTable:
      if (!kind.dp_solution) {
        throw std::invalid_argument("dp policy needs a solved table (run the solver first)");
      }
      return std::make_unique<DpTablePolicy>(kind.dp_solution);
  }
  throw std::invalid_argument("unhandled policy kind");
}

Action round_action_to_grid(const SystemParams& params, const SlotState& state,
                            const Action& action, double bit_step) {
  if (!(bit_step > 0.0)) {
    throw std::invalid_argument("bit_step must be > 0");
  }
  auto snap = [&](double bits) { return std::round(bits / bit_step) * bit_step; };

  const bool busy = state.cpu == CpuState::Busy;
  double total;
  if (state.slot == params.num_slots) {
    // The deadline totals are exact requirements, not targets to round.
    total = busy ? state.remaining + state.buffered : state.remaining;
  } else {
    total = std::clamp(snap(action.offload + action.local), 0.0, state.remaining);
  }

  double cap = total;
  if (busy && state.slot < params.num_slots) {
    const double headroom =
        std::floor((params.buffer_size - state.buffered + 1e-9) / bit_step) * bit_step;
    cap = std::min(cap, std::max(0.0, headroom));
  }
  const double offload = std::clamp(snap(action.offload), 0.0, cap);
  return {offload, total - offload};
}

}  // namespace meco
