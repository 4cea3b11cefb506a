#include "meco/tables.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace meco {

namespace {
int ch_index(CpuState c, ChannelState h) { return 2 * index_of(c) + index_of(h); }

double inv_square(double x) { return 1.0 / (x * x); }
}  // namespace

STable::STable(int num_slots, std::vector<double> values)
    : num_slots_(num_slots), values_(std::move(values)) {
  if (num_slots_ < 1) {
    throw std::invalid_argument("STable needs num_slots >= 1");
  }
  if (values_.size() != static_cast<std::size_t>(4 * (num_slots_ - 1))) {
    throw std::invalid_argument("STable values must hold 4*(K-1) entries");
  }
}

double STable::value(int k, CpuState c, ChannelState h) const {
  if (k < 1 || k >= num_slots_) {
    throw std::invalid_argument("S-table value defined for slots 1..K-1, got " +
                                std::to_string(k));
  }
  return values_[static_cast<std::size_t>((k - 1) * 4 + ch_index(c, h))];
}

double STable::inv_sqrt(int k, CpuState c, ChannelState h) const {
  if (k == num_slots_) {
    return 0.0;  // boundary convention: no future-slot contribution
  }
  return 1.0 / std::sqrt(value(k, c, h));
}

VTable::VTable(int num_slots, double stay_busy) : num_slots_(num_slots) {
  if (num_slots_ < 1) {
    throw std::invalid_argument("VTable needs num_slots >= 1");
  }
  busy_.resize(static_cast<std::size_t>(num_slots_));
  for (int k = 1; k <= num_slots_; ++k) {
    busy_[static_cast<std::size_t>(k - 1)] = std::pow(stay_busy, num_slots_ - k);
  }
}

double VTable::value(int k, CpuState c) const {
  if (k < 1 || k > num_slots_) {
    throw std::invalid_argument("V-table slot outside [1,K]: " + std::to_string(k));
  }
  return c == CpuState::Busy ? busy_[static_cast<std::size_t>(k - 1)] : 0.0;
}

namespace {

// Shared backward recursion. `offload_factor(k_next, c', h')` supplies the
// bracket's offload term for the successor state.
template <typename OffloadFactor>
STable build_s_generic(const SystemParams& params, OffloadFactor offload_factor) {
  params.validate();
  const int K = params.num_slots;
  std::vector<double> values(static_cast<std::size_t>(4 * (K - 1)), 0.0);

  const CpuState cpus[] = {CpuState::Busy, CpuState::Idle};
  const ChannelState chans[] = {ChannelState::Bad, ChannelState::Good};

  // inv[idx] carries 1/sqrt(S_{k+1}) for the layer above; all zeros at k=K-1.
  std::array<double, 4> inv{0.0, 0.0, 0.0, 0.0};
  for (int k = K - 1; k >= 1; --k) {
    std::array<double, 4> layer{};
    for (CpuState c : cpus) {
      for (ChannelState h : chans) {
        double sum = 0.0;
        for (CpuState cn : cpus) {
          const double pc = transition_prob(params.cpu_chain, index_of(c), index_of(cn));
          for (ChannelState hn : chans) {
            const double ph =
                transition_prob(params.channel_chain, index_of(h), index_of(hn));
            const double bracket =
                1.0 + inv[static_cast<std::size_t>(ch_index(cn, hn))] +
                offload_factor(k + 1, cn, hn);
            sum += pc * ph * inv_square(bracket);
          }
        }
        layer[static_cast<std::size_t>(ch_index(c, h))] = sum;
        values[static_cast<std::size_t>((k - 1) * 4 + ch_index(c, h))] = sum;
      }
    }
    for (std::size_t i = 0; i < 4; ++i) {
      inv[i] = 1.0 / std::sqrt(layer[i]);
    }
  }
  return STable(K, std::move(values));
}

}  // namespace

STable build_s_table_zero_buffer(const SystemParams& params) {
  const double ratio = params.offload_ratio();
  return build_s_generic(params, [&](int, CpuState cn, ChannelState hn) {
    return ratio * index_of(cn) * std::sqrt(params.gain(hn));
  });
}

VTable build_v_table(const SystemParams& params) {
  params.validate();
  return VTable(params.num_slots, params.cpu_chain.stay_prob_state0);
}

STable build_s_tilde_table(const SystemParams& params, const VTable& v) {
  if (v.num_slots() != params.num_slots) {
    throw std::invalid_argument("V-table slot count does not match params");
  }
  const double ratio = params.offload_ratio();
  return build_s_generic(params, [&](int k_next, CpuState cn, ChannelState hn) {
    const double keep = 1.0 - v.value(k_next, cn);
    return ratio * keep * std::sqrt(keep) * std::sqrt(params.gain(hn));
  });
}

double single_step_s(const SystemParams& params, CpuState c, ChannelState h) {
  const double ratio = params.offload_ratio();
  const CpuState cpus[] = {CpuState::Busy, CpuState::Idle};
  const ChannelState chans[] = {ChannelState::Bad, ChannelState::Good};
  double sum = 0.0;
  for (CpuState cn : cpus) {
    const double pc = transition_prob(params.cpu_chain, index_of(c), index_of(cn));
    for (ChannelState hn : chans) {
      const double ph = transition_prob(params.channel_chain, index_of(h), index_of(hn));
      const double bracket = 1.0 + ratio * index_of(cn) * std::sqrt(params.gain(hn));
      sum += pc * ph * inv_square(bracket);
    }
  }
  return sum;
}

}  // namespace meco
