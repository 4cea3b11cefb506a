#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace meco {

// Thrown when a policy emits (or a caller supplies) an action that violates
// the per-slot constraints of its state. The message names the slot and the
// violated constraint.
class InfeasibleActionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by the dynamic-programming solver when the exact state-action count
// of the requested grid exceeds the configured budget.
class BudgetExceededError : public std::runtime_error {
 public:
  BudgetExceededError(const std::string& msg, std::uint64_t count,
                      std::uint64_t budget)
      : std::runtime_error(msg), state_action_count(count), budget(budget) {}

  std::uint64_t state_action_count;
  std::uint64_t budget;
};

}  // namespace meco
