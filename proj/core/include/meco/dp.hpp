#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "meco/model.hpp"

namespace meco {

// Discretization of the state/action space for the exact solver.
struct DpGrid {
  double bit_step = 1.0;  // integer bits; must divide total_bits and buffer_size
  std::uint64_t max_state_actions = 1'000'000'000;  // solve-budget guard
};

// Exact backward-induction solution: minimal expected energy (value) and the
// minimizing action (argmin) for every on-grid state. The ground-truth oracle
// all policies are compared against.
class DpSolution {
 public:
  int num_slots() const { return num_slots_; }
  double bit_step() const { return bit_step_; }
  int remaining_levels() const { return levels_l_; }  // points on the L axis
  int buffer_levels() const { return levels_q_; }     // points on the q axis

  // Lookup by physical state; `remaining` and `buffered` must sit on the grid.
  double value(int k, CpuState c, ChannelState h, double remaining, double buffered) const;
  Action action(int k, CpuState c, ChannelState h, double remaining, double buffered) const;

  // Index-space access for tests and serialization; l_idx/q_idx in grid steps.
  double value_at(int k, int c, int h, int l_idx, int q_idx) const;
  Action action_at(int k, int c, int h, int l_idx, int q_idx) const;

 private:
  DpSolution() = default;
  std::size_t offset(int k, int c, int h, int l_idx, int q_idx) const;
  int level_of(double bits, const char* what) const;

  int num_slots_ = 0;
  double bit_step_ = 1.0;
  int levels_l_ = 0;
  int levels_q_ = 0;
  std::vector<double> value_;
  std::vector<std::int32_t> act_of_;  // argmin components in grid steps
  std::vector<std::int32_t> act_lo_;

  friend DpSolution solve_dp(const SystemParams&, const DpGrid&);
  friend DpSolution dp_import(std::istream&);
};

// All grid actions admissible in `state`: for slots before the deadline every
// (u_of, u_lo) with u_of+u_lo <= L and, while the helper is busy, u_of bounded
// by buffer headroom; at the deadline the demand-computing rule collapses the
// set (busy: the single action (0, L+q); idle: all splits of exactly L).
// Ordered by ascending u_of, then ascending u_lo.
std::vector<Action> feasible_actions(const SystemParams& params, const SlotState& state,
                                     double bit_step = 1.0);

// Exact number of state-action pairs backward induction would evaluate.
std::uint64_t count_state_actions(const SystemParams& params, const DpGrid& grid);

// Backward induction over the full grid. Expectations use exact transition
// probabilities; ties in the minimization break toward smaller u_of, then
// smaller u_lo, so the argmin is deterministic. Throws BudgetExceededError
// (with the exact count) when the grid exceeds grid.max_state_actions.
DpSolution solve_dp(const SystemParams& params, const DpGrid& grid = {});

// The recorded argmin for an on-grid state; off-grid states are rejected.
Action dp_query(const DpSolution& solution, const SlotState& state);

// Plain-text round-trip of a solution, for fixtures and offline inspection.
void dp_export(const DpSolution& solution, std::ostream& out);
DpSolution dp_import(std::istream& in);

}  // namespace meco
