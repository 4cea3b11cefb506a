#include <stdexcept>

#include "doctest.h"
#include "meco/markov.hpp"

using namespace meco;

TEST_CASE("transition matrix rows are built from the stay probabilities") {
  TwoStateChain chain{0.7, 0.8};
  CHECK(transition_prob(chain, 0, 0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(transition_prob(chain, 0, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(transition_prob(chain, 1, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(transition_prob(chain, 1, 0) == doctest::Approx(0.2).epsilon(1e-15));

  // rows sum to 1 exactly, not just approximately: the off-diagonal is
  // literally computed as 1 - stay
  CHECK(transition_prob(chain, 0, 0) + transition_prob(chain, 0, 1) == 1.0);
  CHECK(transition_prob(chain, 1, 0) + transition_prob(chain, 1, 1) == 1.0);
}

TEST_CASE("stationary distribution of the reference chain") {
  TwoStateChain chain{0.7, 0.8};  // leave rates 0.3 and 0.2
  const auto pi = stationary_dist(chain);
  CHECK(pi[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(pi[0] + pi[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("stationary distribution handles one-sided absorbing chains") {
  // state 1 absorbing, state 0 leaks: all mass ends in state 1
  const auto pi = stationary_dist(TwoStateChain{0.3, 1.0});
  CHECK(pi[0] == doctest::Approx(0.0));
  CHECK(pi[1] == doctest::Approx(1.0));
}

TEST_CASE("doubly absorbing chain has no unique stationary distribution") {
  CHECK_THROWS_AS(stationary_dist(TwoStateChain{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("chain validation names the offending probability") {
  CHECK_NOTHROW(validate_chain(TwoStateChain{0.0, 1.0}, "cpu_chain"));
  CHECK_THROWS_WITH_AS(validate_chain(TwoStateChain{-0.1, 0.5}, "cpu_chain"),
                       doctest::Contains("cpu_chain.stay_prob_state0"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(validate_chain(TwoStateChain{0.5, 1.2}, "channel_chain"),
                       doctest::Contains("channel_chain.stay_prob_state1"),
                       std::invalid_argument);
}

TEST_CASE("sampling is deterministic given the stream seed") {
  TwoStateChain chain{0.7, 0.8};
  UniformStream a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    int from = i % 2;
    CHECK(sample_next(chain, from, a) == sample_next(chain, from, b));
  }
}

TEST_CASE("degenerate stay probabilities make sampling deterministic") {
  UniformStream rng(7);
  TwoStateChain stuck{1.0, 1.0};
  for (int i = 0; i < 20; ++i) {
    CHECK(sample_next(stuck, 0, rng) == 0);
    CHECK(sample_next(stuck, 1, rng) == 1);
  }
  TwoStateChain flip{0.0, 0.0};
  for (int i = 0; i < 20; ++i) {
    CHECK(sample_next(flip, 0, rng) == 1);
    CHECK(sample_next(flip, 1, rng) == 0);
  }
}

TEST_CASE("long-run state frequencies approach the stationary distribution") {
  TwoStateChain chain{0.7, 0.8};
  UniformStream rng(123);
  int state = sample_stationary(chain, rng);
  const int n = 200000;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    state = sample_next(chain, state, rng);
    ones += state;
  }
  // pi1 = 0.6; a 200k-step average should sit well within +-0.01
  CHECK(static_cast<double>(ones) / n == doctest::Approx(0.6).epsilon(0.02));
}

TEST_CASE("seed mixing separates the sub-streams") {
  // adjacent seeds and stream ids must not produce correlated engines;
  // a cheap necessary condition is that the mixed values all differ
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(0, 0) != 0);

  UniformStream cpu(mix_seed(5, 0)), channel(mix_seed(5, 1));
  int same = 0;
  for (int i = 0; i < 1000; ++i) {
    if (cpu.next() < 0.5 && channel.next() < 0.5) ++same;
  }
  // independent fair coins agree about a quarter of the time
  CHECK(same > 150);
  CHECK(same < 350);
}

TEST_CASE("uniform draws stay inside the half-open unit interval") {
  UniformStream rng(999);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
