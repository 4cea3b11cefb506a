#pragma once

#include <cmath>
#include <string>

#include "meco/errors.hpp"
#include "meco/markov.hpp"

namespace meco {

// Physical and stochastic parameters of one problem instance. Defaults follow
// the reference evaluation setup: a 3000-bit task over five 100 ms slots, CPU
// energy alpha*u^3 with alpha = gamma*w^3/t0^2, transmit energy lambda*u^3/h
// with lambda = lambda0/t0^2, a good/bad channel with gains 1e-3/1e-5, and a
// 300-bit helper buffer.
struct SystemParams {
  double total_bits = 3000.0;         // D: task size [bits]
  int num_slots = 5;                  // K: deadline in slots
  double slot_duration = 0.1;         // t0 [s]
  double cycle_energy_coeff = 1e-28;  // gamma: switched-capacitance scale
  double cycles_per_bit = 1e5;        // w
  double tx_energy_coeff = 1e-15;     // lambda0: raw transmit-energy coefficient
  double gain_good = 1e-3;            // channel power gain in the good state
  double gain_bad = 1e-5;             // and in the bad state
  TwoStateChain cpu_chain{0.7, 0.8};      // stay-busy, stay-idle
  TwoStateChain channel_chain{0.7, 0.8};  // stay-bad, stay-good
  double buffer_size = 300.0;         // Q: helper buffer [bits]

  // Effective per-cube coefficients; both fold in the slot duration.
  double alpha() const {
    const double w3 = cycles_per_bit * cycles_per_bit * cycles_per_bit;
    return cycle_energy_coeff * w3 / (slot_duration * slot_duration);
  }
  double lambda() const { return tx_energy_coeff / (slot_duration * slot_duration); }
  double gain(ChannelState h) const {
    return h == ChannelState::Good ? gain_good : gain_bad;
  }
  // sqrt(alpha/lambda): the scale-free factor in every closed-form split.
  double offload_ratio() const { return std::sqrt(alpha() / lambda()); }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Full controller state at the start of slot `slot` (1-based).
struct SlotState {
  int slot = 1;
  CpuState cpu = CpuState::Idle;
  ChannelState channel = ChannelState::Good;
  double remaining = 0.0;  // L_k: bits still to be computed by the deadline
  double buffered = 0.0;   // q_k: bits parked in the helper buffer
};

// Per-slot decision: how many bits to offload and to compute locally.
struct Action {
  double offload = 0.0;  // u_of [bits]
  double local = 0.0;    // u_lo [bits]
};

// Energy for computing u_lo bits locally in one slot: alpha * u_lo^3.
double local_energy(const SystemParams& params, double u_lo);

// Energy for transmitting u_of bits over a channel with the given power gain:
// lambda * u_of^3 / gain.
double offload_energy(const SystemParams& params, double u_of, double gain);

// Total slot energy: local + offload at the slot's channel gain.
double slot_cost(const SystemParams& params, const SlotState& state, const Action& action);

// Feasibility of an action in a state. Returns a description of the first
// violated constraint (naming the slot and the constraint), or an empty string
// when the action is admissible. `tol` is an absolute slack in bits for
// boundary comparisons.
//
// Constraints checked, in order: component nonnegativity; the per-slot data
// cap u_of+u_lo <= L (slots before the deadline); buffer headroom
// u_of <= Q - q while the helper is busy; the deadline rules — busy helper:
// exactly (u_of=0, u_lo=L+q); idle helper: u_of+u_lo = L.
std::string check_action(const SystemParams& params, const SlotState& state,
                         const Action& action, double tol = 1e-9);

// Same check, throwing InfeasibleActionError on the first violation.
void require_feasible(const SystemParams& params, const SlotState& state,
                      const Action& action, double tol = 1e-9);

// Structural validity of a state: slot in [1,K], remaining in [0,D],
// buffered in [0,Q], and an empty buffer at slot 1.
std::string check_state(const SystemParams& params, const SlotState& state,
                        double tol = 1e-9);

// One-step dynamics: the remaining workload shrinks by the slot total, and the
// buffer accumulates the offload while the helper is busy or drains to zero
// once it was idle (an idle helper computes everything it holds within the
// slot). Requires slot < K and a feasible action.
SlotState transition(const SystemParams& params, const SlotState& state,
                     const Action& action, CpuState next_cpu, ChannelState next_channel);

}  // namespace meco
