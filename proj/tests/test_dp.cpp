#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "meco/dp.hpp"
#include "meco/policies.hpp"

using namespace meco;

namespace {

SystemParams tiny_params(double d, int k, double q) {
  SystemParams p;
  p.total_bits = d;
  p.num_slots = k;
  p.buffer_size = q;
  return p;
}

}  // namespace

TEST_CASE("feasible actions enumerate the simplex in order") {
  SystemParams p = tiny_params(10.0, 3, 5.0);
  SlotState x{1, CpuState::Idle, ChannelState::Good, 2.0, 0.0};
  auto actions = feasible_actions(p, x, 1.0);
  REQUIRE(actions.size() == 6);
  const double expect[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {2, 0}};
  for (int i = 0; i < 6; ++i) {
    CHECK(actions[i].offload == expect[i][0]);
    CHECK(actions[i].local == expect[i][1]);
  }
}

TEST_CASE("feasible actions respect buffer headroom while busy") {
  SystemParams p = tiny_params(10.0, 3, 5.0);
  SlotState x{2, CpuState::Busy, ChannelState::Good, 4.0, 4.0};  // headroom 1
  auto actions = feasible_actions(p, x, 1.0);
  for (const auto& a : actions) {
    CHECK(a.offload <= 1.0);
    CHECK(a.offload + a.local <= 4.0);
  }
  // u_of in {0,1}: 5 actions with u_of=0 (u_lo 0..4), 4 with u_of=1
  CHECK(actions.size() == 9);
}

TEST_CASE("deadline slot collapses the action set") {
  SystemParams p = tiny_params(10.0, 3, 5.0);
  SlotState busy{3, CpuState::Busy, ChannelState::Good, 3.0, 2.0};
  auto must = feasible_actions(p, busy, 1.0);
  REQUIRE(must.size() == 1);
  CHECK(must[0].offload == 0.0);
  CHECK(must[0].local == 5.0);

  SlotState idle{3, CpuState::Idle, ChannelState::Good, 3.0, 0.0};
  auto splits = feasible_actions(p, idle, 1.0);
  REQUIRE(splits.size() == 4);  // (0,3),(1,2),(2,1),(3,0)
  for (const auto& a : splits) {
    CHECK(a.offload + a.local == 3.0);
  }
  CHECK(splits.front().offload == 0.0);
  CHECK(splits.back().offload == 3.0);
}

TEST_CASE("state-action count matches brute-force enumeration") {
  for (auto [d, k, q] : {std::tuple{6.0, 2, 3.0}, {10.0, 3, 4.0}, {8.0, 4, 8.0}}) {
    SystemParams p = tiny_params(d, k, q);
    DpGrid grid;
    std::uint64_t brute = 0;
    for (int slot = 1; slot <= k; ++slot) {
      for (int c = 0; c < 2; ++c) {
        for (int h = 0; h < 2; ++h) {
          for (int l = 0; l <= static_cast<int>(d); ++l) {
            for (int qq = 0; qq <= static_cast<int>(q); ++qq) {
              SlotState x{slot, static_cast<CpuState>(c), static_cast<ChannelState>(h),
                          static_cast<double>(l), static_cast<double>(qq)};
              brute += feasible_actions(p, x, 1.0).size();
            }
          }
        }
      }
    }
    CHECK(count_state_actions(p, grid) == brute);
  }
}

TEST_CASE("budget guard throws with the exact count") {
  SystemParams p;  // default D=3000, K=5, Q=300: far beyond any small budget
  DpGrid grid;
  grid.max_state_actions = 1000;
  try {
    solve_dp(p, grid);
    FAIL_CHECK("expected BudgetExceededError");
  } catch (const BudgetExceededError& e) {
    CHECK(e.state_action_count == count_state_actions(p, DpGrid{}));
    CHECK(e.budget == 1000);
    CHECK(std::string(e.what()).find("bit_step") != std::string::npos);
  }
}

TEST_CASE("default-scale problem exceeds the default budget") {
  SystemParams p;
  CHECK(count_state_actions(p, DpGrid{}) > DpGrid{}.max_state_actions);
  CHECK_THROWS_AS(solve_dp(p, DpGrid{}), BudgetExceededError);
}

TEST_CASE("one-slot instance minimizes over the terminal splits") {
  SystemParams p = tiny_params(2.0, 1, 0.0);
  auto sol = solve_dp(p, DpGrid{});
  // candidates (0,2),(1,1),(2,0): the local cube coefficient is 10x cheaper,
  // so everything stays local
  auto a = sol.action(1, CpuState::Idle, ChannelState::Good, 2.0, 0.0);
  CHECK(a.offload == 0.0);
  CHECK(a.local == 2.0);
  CHECK(sol.value(1, CpuState::Idle, ChannelState::Good, 2.0, 0.0) ==
        doctest::Approx(8e-11).epsilon(1e-12));
}

TEST_CASE("cost ties break toward the smaller offload") {
  SystemParams p = tiny_params(1.0, 1, 0.0);
  p.gain_good = 1e-2;  // lambda/h = 1e-13/1e-2 = 1e-11 = alpha: exact cost tie
  auto sol = solve_dp(p, DpGrid{});
  auto a = sol.action(1, CpuState::Idle, ChannelState::Good, 1.0, 0.0);
  CHECK(a.offload == 0.0);
  CHECK(a.local == 1.0);
}

TEST_CASE("values satisfy the one-step optimality recursion") {
  SystemParams p = tiny_params(6.0, 3, 4.0);
  auto sol = solve_dp(p, DpGrid{});
  for (int k = 1; k < p.num_slots; ++k) {
    for (int c = 0; c < 2; ++c) {
      for (int h = 0; h < 2; ++h) {
        for (double l : {0.0, 2.0, 5.0}) {
          for (double q : {0.0, 3.0}) {
            SlotState x{k, static_cast<CpuState>(c), static_cast<ChannelState>(h), l, q};
            double best = std::numeric_limits<double>::infinity();
            for (const auto& a : feasible_actions(p, x, 1.0)) {
              double cost = slot_cost(p, x, a);
              for (int cn = 0; cn < 2; ++cn) {
                for (int hn = 0; hn < 2; ++hn) {
                  const double prob = transition_prob(p.cpu_chain, c, cn) *
                                      transition_prob(p.channel_chain, h, hn);
                  auto next = transition(p, x, a, static_cast<CpuState>(cn),
                                         static_cast<ChannelState>(hn));
                  cost += prob * sol.value(next.slot, next.cpu, next.channel,
                                           next.remaining, next.buffered);
                }
              }
              best = std::min(best, cost);
            }
            CHECK(sol.value(k, x.cpu, x.channel, l, q) ==
                  doctest::Approx(best).epsilon(1e-12));
          }
        }
      }
    }
  }
}

TEST_CASE("recorded argmin reproduces the recorded value") {
  SystemParams p = tiny_params(6.0, 3, 4.0);
  auto sol = solve_dp(p, DpGrid{});
  SlotState x{1, CpuState::Idle, ChannelState::Good, 6.0, 0.0};
  auto a = dp_query(sol, x);
  double cost = slot_cost(p, x, a);
  for (int cn = 0; cn < 2; ++cn) {
    for (int hn = 0; hn < 2; ++hn) {
      const double prob = transition_prob(p.cpu_chain, 1, cn) *
                          transition_prob(p.channel_chain, 1, hn);
      auto next = transition(p, x, a, static_cast<CpuState>(cn),
                             static_cast<ChannelState>(hn));
      cost += prob * sol.value(next.slot, next.cpu, next.channel, next.remaining,
                               next.buffered);
    }
  }
  CHECK(cost == doctest::Approx(sol.value(1, x.cpu, x.channel, 6.0, 0.0)).epsilon(1e-12));
}

TEST_CASE("off-grid queries are rejected") {
  SystemParams p = tiny_params(6.0, 3, 4.0);
  auto sol = solve_dp(p, DpGrid{});
  CHECK_THROWS_AS(sol.value(1, CpuState::Idle, ChannelState::Good, 2.5, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sol.value(1, CpuState::Idle, ChannelState::Good, 7.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(dp_query(sol, SlotState{1, CpuState::Idle, ChannelState::Good, 2.5, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(sol.value(0, CpuState::Idle, ChannelState::Good, 2.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("coarser grids are honored") {
  SystemParams p = tiny_params(40.0, 3, 20.0);
  DpGrid grid;
  grid.bit_step = 10.0;
  auto sol = solve_dp(p, grid);
  CHECK(sol.bit_step() == 10.0);
  CHECK(sol.remaining_levels() == 5);  // 0,10,20,30,40
  CHECK(sol.buffer_levels() == 3);     // 0,10,20
  auto a = sol.action(1, CpuState::Idle, ChannelState::Good, 40.0, 0.0);
  CHECK(std::fmod(a.offload, 10.0) == 0.0);
  CHECK(std::fmod(a.local, 10.0) == 0.0);
  // the step must divide both extents
  DpGrid bad;
  bad.bit_step = 7.0;
  CHECK_THROWS_AS(solve_dp(p, bad), std::invalid_argument);
}

TEST_CASE("solutions round-trip through the text format") {
  SystemParams p = tiny_params(8.0, 3, 4.0);
  auto sol = solve_dp(p, DpGrid{});

  std::ostringstream out;
  dp_export(sol, out);
  const std::string blob = out.str();
  CHECK(blob.rfind("mecodp 1", 0) == 0);

  std::istringstream in(blob);
  auto back = dp_import(in);
  CHECK(back.num_slots() == sol.num_slots());
  CHECK(back.bit_step() == sol.bit_step());
  CHECK(back.remaining_levels() == sol.remaining_levels());
  CHECK(back.buffer_levels() == sol.buffer_levels());

  // %.17g output re-reads to bit-identical doubles, so a re-export matches
  std::ostringstream out2;
  dp_export(back, out2);
  CHECK(out2.str() == blob);

  // spot-check a value and an action
  CHECK(back.value(1, CpuState::Idle, ChannelState::Good, 8.0, 0.0) ==
        sol.value(1, CpuState::Idle, ChannelState::Good, 8.0, 0.0));
  auto a = back.action(2, CpuState::Busy, ChannelState::Bad, 5.0, 2.0);
  auto b = sol.action(2, CpuState::Busy, ChannelState::Bad, 5.0, 2.0);
  CHECK(a.offload == b.offload);
  CHECK(a.local == b.local);
}

TEST_CASE("corrupt solution files are rejected") {
  std::istringstream wrong_magic("nope 1\n");
  CHECK_THROWS_AS(dp_import(wrong_magic), std::invalid_argument);

  SystemParams p = tiny_params(4.0, 2, 2.0);
  auto sol = solve_dp(p, DpGrid{});
  std::ostringstream out;
  dp_export(sol, out);
  std::string blob = out.str();
  blob.resize(blob.size() / 2);  // truncate mid-table
  std::istringstream truncated(blob);
  CHECK_THROWS_AS(dp_import(truncated), std::invalid_argument);
}

TEST_CASE("table policy follows the recorded argmin") {
  SystemParams p = tiny_params(6.0, 3, 4.0);
  auto sol = std::make_shared<DpSolution>(solve_dp(p, DpGrid{}));
  PolicyKind kind;
  kind.name = PolicyName::DpTable;
  kind.dp_solution = sol;
  auto policy = make_policy(p, kind);
  CHECK(policy->name() == "dp");
  SlotState x{1, CpuState::Idle, ChannelState::Good, 6.0, 0.0};
  auto a = policy->decide(x);
  auto ref = dp_query(*sol, x);
  CHECK(a.offload == ref.offload);
  CHECK(a.local == ref.local);
}

TEST_CASE("interior values dominate coarser approximations") {
  // refining the action grid can only lower the minimum
  SystemParams p = tiny_params(12.0, 3, 6.0);
  DpGrid fine;  // step 1
  DpGrid coarse;
  coarse.bit_step = 3.0;
  auto f = solve_dp(p, fine);
  auto c = solve_dp(p, coarse);
  for (int cc = 0; cc < 2; ++cc) {
    for (int h = 0; h < 2; ++h) {
      CHECK(f.value(1, static_cast<CpuState>(cc), static_cast<ChannelState>(h), 12.0, 0.0) <=
            c.value(1, static_cast<CpuState>(cc), static_cast<ChannelState>(h), 12.0, 0.0) +
                1e-18);
    }
  }
}
