#pragma once

#include "meco/simulate.hpp"

namespace meco {

struct ThresholdResult {
  double q_threshold = 0.0;   // bits; grid-rounded probe the search settled on
  int iterations = 0;         // bisection passes actually run
  double final_gap = 0.0;     // |E_tlbp - E_zbp| at the returned probe [J]
  bool converged = false;     // false when max_iter elapsed first
  int episodes_per_probe = 0;
  std::uint64_t base_seed = 0;
  // Diagnostics: the comparison energies, plus the bracket endpoints evaluated
  // once up front so the sign structure is observable rather than assumed.
  double zbp_energy = 0.0;
  double tlbp_energy_at_zero = 0.0;
  double tlbp_energy_at_half_d = 0.0;
};

// Bisection for the buffer size at which the truncated large-buffer policy
// stops beating the zero-buffer rule. The interval starts at [0, D/2]; each
// pass probes the midpoint (rounded to the bit grid for evaluation only),
// compares the TLBP mean at that buffer against the buffer-independent ZBP
// mean — both estimated from the same seed list, so the comparison is
// low-variance — and keeps the half where the gap persists. Stops when the gap
// falls within rel_tol * zbp_energy, or returns the best probe seen with
// converged=false after max_iter passes.
ThresholdResult find_q_threshold(const SystemParams& params, int episodes,
                                 double rel_tol, int max_iter, std::uint64_t base_seed,
                                 const SimOptions& options = {});

}  // namespace meco
