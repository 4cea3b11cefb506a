#pragma once

#include <vector>

#include "meco/model.hpp"

namespace meco {

// Backward-recursion table S_k(c,h) driving the closed-form policies. Entries
// exist for slots 1..K-1; slot K is the analytic boundary where the
// reciprocal-square-root contribution vanishes. That boundary is encoded
// directly as inv_sqrt(K,*,*) == 0 — no floating infinity is ever stored, so
// no NaN can propagate out of the recursion.
class STable {
 public:
  // `values` laid out as (k-1)*4 + 2*index(cpu) + index(channel), k in 1..K-1.
  STable(int num_slots, std::vector<double> values);

  // S_k(c,h); valid for k in [1, K-1].
  double value(int k, CpuState c, ChannelState h) const;

  // 1/sqrt(S_k(c,h)); returns exactly 0 for k == K.
  double inv_sqrt(int k, CpuState c, ChannelState h) const;

  int num_slots() const { return num_slots_; }

 private:
  int num_slots_;
  std::vector<double> values_;
};

// Probability that bits buffered at the helper in slot k are never computed by
// it and come back as deadline work: value(k, Busy) = stay_busy^(K-k),
// value(k, Idle) = 0 (an idle helper clears its buffer immediately).
class VTable {
 public:
  VTable(int num_slots, double stay_busy);
  double value(int k, CpuState c) const;  // k in [1, K]
  int num_slots() const { return num_slots_; }

 private:
  int num_slots_;
  std::vector<double> busy_;  // busy_[k-1] = stay_busy^(K-k)
};

// Zero-buffer recursion: S_k(c,h) = sum over next (c',h') of
// P(c'|c) P(h'|h) (1 + 1/sqrt(S_{k+1}(c',h')) + sqrt(alpha/lambda) c' sqrt(h'))^-2.
STable build_s_table_zero_buffer(const SystemParams& params);

VTable build_v_table(const SystemParams& params);

// Large-buffer analogue: the offload factor inside the bracket becomes
// sqrt(alpha/lambda) (1 - V_{k+1}(c'))^{3/2} sqrt(h'), folding in the risk that
// buffered bits are later demand-computed.
STable build_s_tilde_table(const SystemParams& params, const VTable& v);

// Single-step S(c,h) = sum over (c',h') of P(c'|c) P(h'|h)
// (1 + sqrt(alpha/lambda) c' sqrt(h'))^-2 — the one-slot-left special case
// used by the deadline-cost lower bound.
double single_step_s(const SystemParams& params, CpuState c, ChannelState h);

}  // namespace meco
