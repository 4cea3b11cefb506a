#include "meco/model.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace meco {

namespace {
double cube(double x) { return x * x * x; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void require_positive(double v, const char* field) {
  if (!(v > 0.0)) {
    throw std::invalid_argument(std::string(field) + "=" + fmt(v) + " must be > 0");
  }
}
}  // namespace

void SystemParams::validate() const {
  require_positive(total_bits, "total_bits");
  if (num_slots < 1) {
    throw std::invalid_argument("num_slots=" + std::to_string(num_slots) + " must be >= 1");
  }
  require_positive(slot_duration, "slot_duration");
  require_positive(cycle_energy_coeff, "cycle_energy_coeff");
  require_positive(cycles_per_bit, "cycles_per_bit");
  require_positive(tx_energy_coeff, "tx_energy_coeff");
  require_positive(gain_good, "gain_good");
  require_positive(gain_bad, "gain_bad");
  if (!(gain_good > gain_bad)) {
    throw std::invalid_argument("gain_good=" + fmt(gain_good) +
                                " must exceed gain_bad=" + fmt(gain_bad));
  }
  if (!(buffer_size >= 0.0)) {
    throw std::invalid_argument("buffer_size=" + fmt(buffer_size) + " must be >= 0");
  }
  validate_chain(cpu_chain, "cpu_chain");
  validate_chain(channel_chain, "channel_chain");
}

double local_energy(const SystemParams& params, double u_lo) {
  if (u_lo < 0.0) {
    throw std::invalid_argument("local bits must be >= 0, got " + fmt(u_lo));
  }
  return params.alpha() * cube(u_lo);
}

double offload_energy(const SystemParams& params, double u_of, double gain) {
  if (u_of < 0.0) {
    throw std::invalid_argument("offload bits must be >= 0, got " + fmt(u_of));
  }
  if (!(gain > 0.0)) {
    throw std::invalid_argument("channel gain must be > 0, got " + fmt(gain));
  }
  return params.lambda() * cube(u_of) / gain;
}

double slot_cost(const SystemParams& params, const SlotState& state, const Action& action) {
  return local_energy(params, action.local) +
         offload_energy(params, action.offload, params.gain(state.channel));
}

std::string check_action(const SystemParams& params, const SlotState& state,
                         const Action& action, double tol) {
  const std::string at = "slot " + std::to_string(state.slot) + ": ";
  if (action.offload < -tol) {
    return at + "offload=" + fmt(action.offload) + " negative (nonnegativity)";
  }
  if (action.local < -tol) {
    return at + "local=" + fmt(action.local) + " negative (nonnegativity)";
  }
  const double total = action.offload + action.local;
  const bool busy = state.cpu == CpuState::Busy;
  const bool last = state.slot == params.num_slots;

  if (last) {
    if (busy) {
      // Deadline with a busy helper: everything left, plus whatever the helper
      // still buffers, must be computed locally in this slot.
      if (action.offload > tol) {
        return at + "offload=" + fmt(action.offload) +
               " but the busy deadline slot admits no offloading (demand-computing constraint)";
      }
      const double want = state.remaining + state.buffered;
      if (std::abs(action.local - want) > tol) {
        return at + "local=" + fmt(action.local) + " must equal remaining+buffered=" +
               fmt(want) + " (demand-computing constraint)";
      }
      return {};
    }
    if (action.offload > state.remaining + tol) {
      return at + "offload=" + fmt(action.offload) + " exceeds remaining=" +
             fmt(state.remaining) + " (data constraint)";
    }
    if (std::abs(total - state.remaining) > tol) {
      return at + "offload+local=" + fmt(total) + " must equal remaining=" +
             fmt(state.remaining) + " at the idle deadline slot (completion constraint)";
    }
    return {};
  }

  if (total > state.remaining + tol) {
    return at + "offload+local=" + fmt(total) + " exceeds remaining=" +
           fmt(state.remaining) + " (data constraint)";
  }
  if (busy) {
    const double headroom = params.buffer_size - state.buffered;
    if (action.offload > headroom + tol) {
      return at + "offload=" + fmt(action.offload) + " exceeds buffer headroom=" +
             fmt(headroom) + " while the helper is busy (buffer constraint)";
    }
  }
  // Idle helper: offload <= remaining already follows from the data constraint.
  return {};
}

void require_feasible(const SystemParams& params, const SlotState& state,
                      const Action& action, double tol) {
  std::string why = check_action(params, state, action, tol);
  if (!why.empty()) {
    throw InfeasibleActionError(why);
  }
}

std::string check_state(const SystemParams& params, const SlotState& state, double tol) {
  if (state.slot < 1 || state.slot > params.num_slots) {
    return "slot=" + std::to_string(state.slot) + " outside [1," +
           std::to_string(params.num_slots) + "]";
  }
  if (state.remaining < -tol || state.remaining > params.total_bits + tol) {
    return "remaining=" + fmt(state.remaining) + " outside [0," + fmt(params.total_bits) + "]";
  }
  if (state.buffered < -tol || state.buffered > params.buffer_size + tol) {
    return "buffered=" + fmt(state.buffered) + " outside [0," + fmt(params.buffer_size) + "]";
  }
  if (state.slot == 1 && std::abs(state.buffered) > tol) {
    return "buffered=" + fmt(state.buffered) + " must be 0 at slot 1";
  }
  return {};
}

SlotState transition(const SystemParams& params, const SlotState& state,
                     const Action& action, CpuState next_cpu, ChannelState next_channel) {
  if (state.slot >= params.num_slots) {
    throw std::invalid_argument("transition from slot " + std::to_string(state.slot) +
                                " has no successor (deadline is slot " +
                                std::to_string(params.num_slots) + ")");
  }
  require_feasible(params, state, action);
  SlotState next;
  next.slot = state.slot + 1;
  next.cpu = next_cpu;
  next.channel = next_channel;
  next.remaining = std::max(0.0, state.remaining - action.offload - action.local);
  if (state.cpu == CpuState::Busy) {
    next.buffered = std::min(state.buffered + action.offload, params.buffer_size);
  } else {
    next.buffered = 0.0;  // an idle helper drains its whole buffer in the slot
  }
  return next;
}

}  // namespace meco
