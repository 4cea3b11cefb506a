#include "meco/dp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace meco {

namespace {

constexpr double kGridTol = 1e-9;

void validate_grid(const SystemParams& params, const DpGrid& grid) {
  const double step = grid.bit_step;
  if (!(step >= 1.0) || std::abs(step - std::round(step)) > kGridTol) {
    throw std::invalid_argument("bit_step must be a positive integer number of bits, got " +
                                std::to_string(step));
  }
  auto divides = [&](double bits, const char* what) {
    const double n = bits / step;
    if (std::abs(n - std::round(n)) > kGridTol) {
      throw std::invalid_argument(std::string(what) + " must be an integer multiple of bit_step");
    }
  };
  divides(params.total_bits, "total_bits");
  divides(params.buffer_size, "buffer_size");
}

int levels_on_axis(double bits, double step) {
  return static_cast<int>(std::llround(bits / step)) + 1;
}

}  // namespace

std::size_t DpSolution::offset(int k, int c, int h, int l_idx, int q_idx) const {
  return ((((static_cast<std::size_t>(k - 1) * 2 + static_cast<std::size_t>(c)) * 2 +
            static_cast<std::size_t>(h)) *
               static_cast<std::size_t>(levels_l_) +
           static_cast<std::size_t>(l_idx)) *
              static_cast<std::size_t>(levels_q_) +
          static_cast<std::size_t>(q_idx));
}

int DpSolution::level_of(double bits, const char* what) const {
  const double n = bits / bit_step_;
  const long long r = std::llround(n);
  if (std::abs(bits - static_cast<double>(r) * bit_step_) > kGridTol) {
    throw std::invalid_argument(std::string(what) + "=" + std::to_string(bits) +
                                " is off the solved grid (bit_step " +
                                std::to_string(bit_step_) + ")");
  }
  return static_cast<int>(r);
}

double DpSolution::value_at(int k, int c, int h, int l_idx, int q_idx) const {
  if (k < 1 || k > num_slots_ || c < 0 || c > 1 || h < 0 || h > 1 || l_idx < 0 ||
      l_idx >= levels_l_ || q_idx < 0 || q_idx >= levels_q_) {
    throw std::invalid_argument("solution lookup outside the solved grid");
  }
  return value_[offset(k, c, h, l_idx, q_idx)];
}

Action DpSolution::action_at(int k, int c, int h, int l_idx, int q_idx) const {
  if (k < 1 || k > num_slots_ || c < 0 || c > 1 || h < 0 || h > 1 || l_idx < 0 ||
      l_idx >= levels_l_ || q_idx < 0 || q_idx >= levels_q_) {
    throw std::invalid_argument("solution lookup outside the solved grid");
  }
  const std::size_t at = offset(k, c, h, l_idx, q_idx);
  return {static_cast<double>(act_of_[at]) * bit_step_,
          static_cast<double>(act_lo_[at]) * bit_step_};
}

double DpSolution::value(int k, CpuState c, ChannelState h, double remaining,
                         double buffered) const {
  return value_at(k, index_of(c), index_of(h), level_of(remaining, "remaining"),
                  level_of(buffered, "buffered"));
}

Action DpSolution::action(int k, CpuState c, ChannelState h, double remaining,
                          double buffered) const {
  return action_at(k, index_of(c), index_of(h), level_of(remaining, "remaining"),
                   level_of(buffered, "buffered"));
}

std::vector<Action> feasible_actions(const SystemParams& params, const SlotState& state,
                                     double bit_step) {
  params.validate();
  DpGrid probe;
  probe.bit_step = bit_step;
  validate_grid(params, probe);

  const auto level = [&](double bits, const char* what) {
    const double n = bits / bit_step;
    if (std::abs(n - std::round(n)) > kGridTol) {
      throw std::invalid_argument(std::string(what) + " is off the grid");
    }
    return static_cast<int>(std::llround(n));
  };
  const int il = level(state.remaining, "remaining");
  const int iq = level(state.buffered, "buffered");
  const int hq = level(params.buffer_size, "buffer_size");
  const bool busy = state.cpu == CpuState::Busy;

  std::vector<Action> out;
  if (state.slot == params.num_slots) {
    if (busy) {
      out.push_back({0.0, (il + iq) * bit_step});
      return out;
    }
    out.reserve(static_cast<std::size_t>(il) + 1);
    for (int iof = 0; iof <= il; ++iof) {
      out.push_back({iof * bit_step, (il - iof) * bit_step});
    }
    return out;
  }

  const int cap = busy ? std::min(il, hq - iq) : il;
  for (int iof = 0; iof <= cap; ++iof) {
    for (int ilo = 0; ilo + iof <= il; ++ilo) {
      out.push_back({iof * bit_step, ilo * bit_step});
    }
  }
  return out;
}

std::uint64_t count_state_actions(const SystemParams& params, const DpGrid& grid) {
  params.validate();
  validate_grid(params, grid);
  const std::uint64_t nl = static_cast<std::uint64_t>(levels_on_axis(params.total_bits, grid.bit_step));
  const std::uint64_t nq = static_cast<std::uint64_t>(levels_on_axis(params.buffer_size, grid.bit_step));
  const std::uint64_t K = static_cast<std::uint64_t>(params.num_slots);

  // Refuse to even count grids whose state count alone dwarfs any workable
  // budget; every state has at least one action, so this is already a bound.
  const std::uint64_t states = K * 4 * nl * nq;
  if (nl * nq > 100'000'000ULL) {
    throw BudgetExceededError(
        "grid holds " + std::to_string(states) +
            " states before actions are even counted; shrink total_bits or buffer_size, "
            "or increase bit_step",
        states, grid.max_state_actions);
  }

  // Closed-form action counts per (L,q) cell; channel state doubles everything.
  std::uint64_t inner_busy = 0, inner_idle = 0, term_busy = 0, term_idle = 0;
  for (std::uint64_t il = 0; il < nl; ++il) {
    inner_idle += (il + 1) * (il + 2) / 2 * nq;
    term_idle += (il + 1) * nq;
    term_busy += nq;
    for (std::uint64_t iq = 0; iq < nq; ++iq) {
      const std::uint64_t m = std::min(il, nq - 1 - iq);
      inner_busy += (m + 1) * (il + 1) - m * (m + 1) / 2;
    }
  }
  const std::uint64_t per_inner_layer = 2 * (inner_busy + inner_idle);
  const std::uint64_t terminal = 2 * (term_busy + term_idle);
  return (K - 1) * per_inner_layer + terminal;
}

DpSolution solve_dp(const SystemParams& params, const DpGrid& grid) {
  const std::uint64_t count = count_state_actions(params, grid);
  if (count > grid.max_state_actions) {
    throw BudgetExceededError(
        "backward induction needs " + std::to_string(count) +
            " state-action evaluations but the budget is " +
            std::to_string(grid.max_state_actions) +
            "; shrink total_bits or buffer_size, or increase bit_step",
        count, grid.max_state_actions);
  }

  const int K = params.num_slots;
  const int nl = levels_on_axis(params.total_bits, grid.bit_step);
  const int nq = levels_on_axis(params.buffer_size, grid.bit_step);
  const double step = grid.bit_step;

  DpSolution sol;
  sol.num_slots_ = K;
  sol.bit_step_ = step;
  sol.levels_l_ = nl;
  sol.levels_q_ = nq;
  const std::size_t total = static_cast<std::size_t>(K) * 4 * static_cast<std::size_t>(nl) *
                            static_cast<std::size_t>(nq);
  sol.value_.assign(total, 0.0);
  sol.act_of_.assign(total, 0);
  sol.act_lo_.assign(total, 0);

  // Precomputed cubes of every grid quantity (terminal local loads reach L+q).
  std::vector<double> cube(static_cast<std::size_t>(nl + nq), 0.0);
  for (std::size_t i = 0; i < cube.size(); ++i) {
    const double bits = static_cast<double>(i) * step;
    cube[i] = bits * bits * bits;
  }
  const double alpha = params.alpha();
  // Transmit coefficient per channel index (Bad=0, Good=1).
  const double lam_over_gain[2] = {params.lambda() / params.gain_bad,
                                   params.lambda() / params.gain_good};

  const std::size_t plane = static_cast<std::size_t>(nl) * static_cast<std::size_t>(nq);
  auto at = [&](int k, int c, int h, int il, int iq) {
    return sol.offset(k, c, h, il, iq);
  };

  // Deadline layer: the busy helper forces (0, L+q); the idle case is the
  // one-dimensional split of exactly L.
  for (int h = 0; h < 2; ++h) {
    for (int il = 0; il < nl; ++il) {
      for (int iq = 0; iq < nq; ++iq) {
        // busy (c=0)
        {
          const int ilo = il + iq;
          const std::size_t o = at(K, 0, h, il, iq);
          sol.value_[o] = alpha * cube[static_cast<std::size_t>(ilo)];
          sol.act_of_[o] = 0;
          sol.act_lo_[o] = ilo;
        }
        // idle (c=1)
        {
          double best = std::numeric_limits<double>::infinity();
          int best_of = 0;
          for (int iof = 0; iof <= il; ++iof) {
            const double cost = lam_over_gain[h] * cube[static_cast<std::size_t>(iof)] +
                                alpha * cube[static_cast<std::size_t>(il - iof)];
            if (cost < best) {
              best = cost;
              best_of = iof;
            }
          }
          const std::size_t o = at(K, 1, h, il, iq);
          sol.value_[o] = best;
          sol.act_of_[o] = best_of;
          sol.act_lo_[o] = il - best_of;
        }
      }
    }
  }

  // Backward induction. EJ[(c,h) plane] holds the expectation of the next
  // layer's value conditioned on the current (c,h), evaluated at the next
  // state's (L', q'). Minimization scans u_of then u_lo in ascending order
  // with a strict '<', which realizes the smallest-u_of-then-smallest-u_lo
  // tie-break.
  std::vector<double> ej(4 * plane, 0.0);
  for (int k = K - 1; k >= 1; --k) {
    for (int c = 0; c < 2; ++c) {
      for (int h = 0; h < 2; ++h) {
        double* dst = ej.data() + static_cast<std::size_t>(c * 2 + h) * plane;
        const double pc[2] = {transition_prob(params.cpu_chain, c, 0),
                              transition_prob(params.cpu_chain, c, 1)};
        const double ph[2] = {transition_prob(params.channel_chain, h, 0),
                              transition_prob(params.channel_chain, h, 1)};
        for (int il = 0; il < nl; ++il) {
          for (int iq = 0; iq < nq; ++iq) {
            double acc = 0.0;
            for (int cn = 0; cn < 2; ++cn) {
              for (int hn = 0; hn < 2; ++hn) {
                acc += pc[cn] * ph[hn] * sol.value_[at(k + 1, cn, hn, il, iq)];
              }
            }
            dst[static_cast<std::size_t>(il) * nq + iq] = acc;
          }
        }
      }
    }

    for (int c = 0; c < 2; ++c) {
      const bool busy = c == 0;
      for (int h = 0; h < 2; ++h) {
        const double* ejp = ej.data() + static_cast<std::size_t>(c * 2 + h) * plane;
        for (int il = 0; il < nl; ++il) {
          for (int iq = 0; iq < nq; ++iq) {
            const int cap = busy ? std::min(il, nq - 1 - iq) : il;
            double best = std::numeric_limits<double>::infinity();
            int best_of = 0, best_lo = 0;
            for (int iof = 0; iof <= cap; ++iof) {
              const double tx = lam_over_gain[h] * cube[static_cast<std::size_t>(iof)];
              const int qn = busy ? iq + iof : 0;
              for (int ilo = 0; ilo + iof <= il; ++ilo) {
                const int ln = il - iof - ilo;
                const double cost = tx + alpha * cube[static_cast<std::size_t>(ilo)] +
                                    ejp[static_cast<std::size_t>(ln) * nq + qn];
                if (cost < best) {
                  best = cost;
                  best_of = iof;
                  best_lo = ilo;
                }
              }
            }
            const std::size_t o = at(k, c, h, il, iq);
            sol.value_[o] = best;
            sol.act_of_[o] = best_of;
            sol.act_lo_[o] = best_lo;
          }
        }
      }
    }
  }
  return sol;
}

Action dp_query(const DpSolution& solution, const SlotState& state) {
  if (state.slot < 1 || state.slot > solution.num_slots()) {
    throw std::invalid_argument("slot " + std::to_string(state.slot) +
                                " outside the solved horizon");
  }
  return solution.action(state.slot, state.cpu, state.channel, state.remaining,
                         state.buffered);
}

void dp_export(const DpSolution& solution, std::ostream& out) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "mecodp 1\n%d %.17g %d %d\n", solution.num_slots(),
                solution.bit_step(), solution.remaining_levels(), solution.buffer_levels());
  out << buf;
  for (int k = 1; k <= solution.num_slots(); ++k) {
    for (int c = 0; c < 2; ++c) {
      for (int h = 0; h < 2; ++h) {
        for (int il = 0; il < solution.remaining_levels(); ++il) {
          for (int iq = 0; iq < solution.buffer_levels(); ++iq) {
            const double v = solution.value_at(k, c, h, il, iq);
            const Action a = solution.action_at(k, c, h, il, iq);
            const int iof = static_cast<int>(std::llround(a.offload / solution.bit_step()));
            const int ilo = static_cast<int>(std::llround(a.local / solution.bit_step()));
            std::snprintf(buf, sizeof buf, "%d %d %d %d %d %.17g %d %d\n", k, c, h, il, iq,
                          v, iof, ilo);
            out << buf;
          }
        }
      }
    }
  }
}

DpSolution dp_import(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "mecodp" || version != 1) {
    throw std::invalid_argument("not a recognizable dp solution file");
  }
  DpSolution sol;
  if (!(in >> sol.num_slots_ >> sol.bit_step_ >> sol.levels_l_ >> sol.levels_q_)) {
    throw std::invalid_argument("dp solution header is truncated");
  }
  if (sol.num_slots_ < 1 || sol.levels_l_ < 1 || sol.levels_q_ < 1 || sol.bit_step_ <= 0) {
    throw std::invalid_argument("dp solution header has invalid dimensions");
  }
  const std::size_t total = static_cast<std::size_t>(sol.num_slots_) * 4 *
                            static_cast<std::size_t>(sol.levels_l_) *
                            static_cast<std::size_t>(sol.levels_q_);
  sol.value_.assign(total, 0.0);
  sol.act_of_.assign(total, 0);
  sol.act_lo_.assign(total, 0);
  std::size_t rows = 0;
  int k, c, h, il, iq, iof, ilo;
  double v;
  while (in >> k >> c >> h >> il >> iq >> v >> iof >> ilo) {
    if (k < 1 || k > sol.num_slots_ || c < 0 || c > 1 || h < 0 || h > 1 || il < 0 ||
        il >= sol.levels_l_ || iq < 0 || iq >= sol.levels_q_) {
      throw std::invalid_argument("dp solution row outside declared grid");
    }
    const std::size_t o = sol.offset(k, c, h, il, iq);
    sol.value_[o] = v;
    sol.act_of_[o] = iof;
    sol.act_lo_[o] = ilo;
    ++rows;
  }
  if (rows != total) {
    throw std::invalid_argument("dp solution holds " + std::to_string(rows) +
                                " rows, expected " + std::to_string(total));
  }
  return sol;
}

}  // namespace meco
