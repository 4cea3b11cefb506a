#include "meco/threshold.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace meco {

ThresholdResult find_q_threshold(const SystemParams& params, int episodes,
                                 double rel_tol, int max_iter, std::uint64_t base_seed,
                                 const SimOptions& options) {
  params.validate();
  if (episodes < 1) {
    throw std::invalid_argument("episodes must be >= 1");
  }
  if (!(rel_tol > 0.0)) {
    throw std::invalid_argument("rel_tol must be > 0");
  }
  if (max_iter < 1) {
    throw std::invalid_argument("max_iter must be >= 1");
  }

  const double step = options.round_to_bits ? options.bit_step : 1.0;
  auto snap = [&](double q) { return std::round(q / step) * step; };

  // The zero-buffer rule ignores the buffer entirely, so its mean is computed
  // once and reused for every comparison.
  PolicyKind zbp_kind;
  zbp_kind.name = PolicyName::Zbp;
  const auto zbp = make_policy(params, zbp_kind);
  const double e_zbp = evaluate(params, *zbp, episodes, base_seed, options).mean_energy;

  auto tlbp_mean_at = [&](double q_bits) {
    SystemParams probe = params;
    probe.buffer_size = q_bits;
    PolicyKind kind;
    kind.name = PolicyName::Tlbp;
    const auto tlbp = make_policy(probe, kind);
    return evaluate(probe, *tlbp, episodes, base_seed, options).mean_energy;
  };

  ThresholdResult result;
  result.episodes_per_probe = episodes;
  result.base_seed = base_seed;
  result.zbp_energy = e_zbp;
  result.tlbp_energy_at_zero = tlbp_mean_at(0.0);
  result.tlbp_energy_at_half_d = tlbp_mean_at(snap(params.total_bits / 2.0));

  const double eps = rel_tol * e_zbp;
  double lo = 0.0;
  double hi = params.total_bits / 2.0;
  double best_q = 0.0;
  double best_gap = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double probe_q = snap(mid);
    const double e_tlbp = tlbp_mean_at(probe_q);
    const double gap = std::abs(e_tlbp - e_zbp);
    result.iterations = it;
    if (gap < best_gap) {
      best_gap = gap;
      best_q = probe_q;
    }
    if (gap <= eps) {
      result.q_threshold = probe_q;
      result.final_gap = gap;
      result.converged = true;
      return result;
    }
    if (e_tlbp < e_zbp) {
      hi = mid;  // buffer still pays for itself; the crossover sits below
    } else {
      lo = mid;
    }
  }

  result.q_threshold = best_q;
  result.final_gap = best_gap;
  result.converged = false;
  return result;
}

}  // namespace meco
