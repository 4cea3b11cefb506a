#pragma once

#include <memory>
#include <string_view>

#include "meco/dp.hpp"
#include "meco/tables.hpp"

namespace meco {

// ---------------------------------------------------------------------------
// Closed-form building blocks. All of them return real-valued bit splits; the
// simulator owns the rounding onto the integer-bit grid.
// ---------------------------------------------------------------------------

// Deadline slot with an empty buffer: busy helper computes everything locally;
// idle helper splits L as u_lo = L/(1+sqrt(alpha*h/lambda)). Rejects k != K.
Action last_slot_zero_buffer(const SystemParams& params, const SlotState& state);

// Multi-slot zero-buffer optimum:
// u_lo = L (1 + 1/sqrt(S_k) + ratio*c*sqrt(h))^-1, u_of = ratio*c*sqrt(h)*u_lo.
// At k=K the S contribution is zero and this reduces to last_slot_zero_buffer.
Action zero_buffer_policy(const SystemParams& params, const STable& s, const SlotState& state);

// Minimal expected energy of the zero-buffer optimum from the initial state:
// alpha D^3 (1 + 1/sqrt(S_1) + ratio*c*sqrt(h))^-2. Requires k=1, L=D, q=0.
double expected_energy_zero_buffer(const SystemParams& params, const STable& s,
                                   const SlotState& x1);

// Deadline slot with a buffer: busy helper triggers demand-computing of L+q;
// idle helper splits L exactly as in the zero-buffer rule (its buffer drains
// on its own). Rejects k != K.
Action last_slot_large_buffer(const SystemParams& params, const SlotState& state);

// Large-buffer closed form:
// u_lo = (L + V_k q) (1 + 1/sqrt(S~_k) + ratio (1-V_k)^{3/2} sqrt(h))^-1,
// u_of = sqrt((alpha/lambda) h (1-V_k)) u_lo.
// If the pair exceeds the data cap u_of+u_lo <= L (possible in corner states
// with small L and a full buffer), both components are scaled down
// proportionally, which preserves the offload/local ratio exactly.
Action large_buffer_policy(const SystemParams& params, const STable& s_tilde,
                           const VTable& v, const SlotState& state);

// Lower bound on the expected deadline-slot cost E[J_K | state, action] for a
// state one slot before the deadline: alpha * F~ * S with
// F~ = ((L-u_lo-u_of) + (1-c)*stay_busy*(q+u_of))^3 and the single-step S.
// Verification-only; rejects k != K-1.
double last_slot_cost_lower_bound(const SystemParams& params, const SlotState& state,
                                  const Action& action);

// Truncated large-buffer rule for finite buffers: u_lo as in the large-buffer
// form; when the helper is busy the offload clamps to the buffer headroom
// Q - q. No re-optimization of u_lo after the clamp.
Action tlbp_policy(const SystemParams& params, const STable& s_tilde, const VTable& v,
                   const SlotState& state);

// Zero-buffer decision rule applied verbatim at runtime states (never offloads
// into a busy helper, so the buffer stays empty under its own closed loop).
Action zbp_policy(const SystemParams& params, const STable& s, const SlotState& state);

// Buffer-aware candidate selection: TLBP when the configured buffer reaches
// q_threshold, ZBP below it. The choice is per configuration, not per slot.
Action bacs_policy(const SystemParams& params, double q_threshold, const STable& s,
                   const STable& s_tilde, const VTable& v, const SlotState& state);

// Baseline: an equal share D/K per slot (capped by the remaining workload),
// split between local and offload by the single-slot rule; the deadline slot
// must finish whatever remains.
Action equal_allocation_policy(const SystemParams& params, const SlotState& state);

// ---------------------------------------------------------------------------
// Uniform decision interface over all of the above plus the dp oracle.
// ---------------------------------------------------------------------------

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action decide(const SlotState& state) const = 0;
  virtual std::string_view name() const = 0;
};

enum class PolicyName {
  ZeroBufferOptimal,  // "zero-opt"
  LargeBufferSubOpt,  // "large-sub"
  Tlbp,               // "tlbp"
  Zbp,                // "zbp"
  Bacs,               // "bacs"
  EqualAllocation,    // "equal"
  DpTable,            // "dp"
};

PolicyName parse_policy_name(std::string_view name);  // throws on unknown names
std::string_view policy_name_string(PolicyName name);

// Which policy to instantiate, plus the extras some variants need.
struct PolicyKind {
  PolicyName name = PolicyName::ZeroBufferOptimal;
  double bacs_threshold = 40.0;                   // bits; BACS only
  std::shared_ptr<const DpSolution> dp_solution;  // dp only
};

// Builds the policy with its tables precomputed for `params`. BACS resolves
// its delegate here, once. Throws std::invalid_argument for a dp kind without
// a solution or a BACS threshold outside [0, total_bits].
std::unique_ptr<Policy> make_policy(const SystemParams& params, const PolicyKind& kind);

// Maps an analytic action onto the integer-bit grid: the slot total is rounded
// first (and pinned to the exact required total at the deadline), then the
// offload share is rounded within its headroom and the local share takes the
// remainder. Conservation and feasibility survive rounding by construction.
Action round_action_to_grid(const SystemParams& params, const SlotState& state,
                            const Action& action, double bit_step);

}  // namespace meco
