#include "meco/markov.hpp"

#include <stdexcept>
#include <string>

namespace meco {

namespace {
double stay_prob(const TwoStateChain& chain, int from) {
  return from == 0 ? chain.stay_prob_state0 : chain.stay_prob_state1;
}

void check_index(int idx, const char* what) {
  if (idx != 0 && idx != 1) {
    throw std::invalid_argument(std::string(what) + " state index must be 0 or 1, got " +
                                std::to_string(idx));
  }
}
}  // namespace

double transition_prob(const TwoStateChain& chain, int from, int to) {
  check_index(from, "from");
  check_index(to, "to");
  const double stay = stay_prob(chain, from);
  return to == from ? stay : 1.0 - stay;
}

int sample_next(const TwoStateChain& chain, int from, UniformStream& rng) {
  check_index(from, "from");
  return rng.next() < stay_prob(chain, from) ? from : 1 - from;
}

std::array<double, 2> stationary_dist(const TwoStateChain& chain) {
  const double leave0 = 1.0 - chain.stay_prob_state0;
  const double leave1 = 1.0 - chain.stay_prob_state1;
  if (leave0 + leave1 <= 0.0) {
    throw std::invalid_argument(
        "degenerate chain: both states absorbing, stationary distribution not unique");
  }
  const double pi0 = leave1 / (leave0 + leave1);
  return {pi0, 1.0 - pi0};
}

int sample_stationary(const TwoStateChain& chain, UniformStream& rng) {
  const auto pi = stationary_dist(chain);
  return rng.next() < pi[0] ? 0 : 1;
}

void validate_chain(const TwoStateChain& chain, const char* name) {
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(chain.stay_prob_state0)) {
    throw std::invalid_argument(std::string(name) + ".stay_prob_state0=" +
                                std::to_string(chain.stay_prob_state0) + " outside [0,1]");
  }
  if (!in_unit(chain.stay_prob_state1)) {
    throw std::invalid_argument(std::string(name) + ".stay_prob_state1=" +
                                std::to_string(chain.stay_prob_state1) + " outside [0,1]");
  }
}

}  // namespace meco
