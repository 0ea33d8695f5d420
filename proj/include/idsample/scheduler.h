/* Copyright 2026 The idsample Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <vector>

namespace idsample {

using Tokens = std::int64_t;

// Geometric per-round token budgets: round k may generate floor(B0 * gamma^k)
// tokens, and the whole trajectory is capped at max_total generated tokens.
class BudgetSchedule {
 public:
  static constexpr Tokens kDefaultInitialBudget = 256;
  static constexpr double kDefaultGrowthFactor = 2.0;
  static constexpr Tokens kDefaultMaxTotal = 8192;

  BudgetSchedule();
  // Throws std::invalid_argument unless gamma > 1 and 1 <= B0 <= max_total.
  BudgetSchedule(Tokens initial_budget, double growth_factor, Tokens max_total);

  Tokens initial_budget() const { return initial_budget_; }
  double growth_factor() const { return growth_factor_; }
  Tokens max_total() const { return max_total_; }

  friend bool operator==(const BudgetSchedule&, const BudgetSchedule&) = default;

 private:
  Tokens initial_budget_;
  double growth_factor_;
  Tokens max_total_;
};

// Uncapped budget of round k: floor(B0 * gamma^k), at least 1. Saturates
// instead of overflowing for very large k.
Tokens round_budget(const BudgetSchedule& schedule, int k);

// Per-round budgets until the cumulative sum reaches max_total; the last
// entry is capped to the remainder so the list always sums to max_total.
std::vector<Tokens> plan_rounds(const BudgetSchedule& schedule);

int rounds_to_exhaust(const BudgetSchedule& schedule);

// gamma / (gamma - 1) * final_round_budget. Strict upper bound on the sum of
// all uncapped round budgets up to and including that round (geometric series).
// The form gamma * L / (gamma + 1) is below L for every gamma > 0, so it cannot
// bound a total that contains L and is not used.
double overhead_bound(double gamma, Tokens final_round_budget);

// Same constant applied to the final trajectory length L instead of the final
// round's budget. Exposed for reporting; not a proven bound on its own.
double overhead_bound_on_length(double gamma, Tokens trajectory_length);

struct RoundCost {
  Tokens allocated = 0;
  Tokens generated = 0;     // includes boundary-snap tokens
  Tokens snap_tokens = 0;
  Tokens prompt_tokens = 0; // summed over every request of the round
  int calls = 0;
  double wall_time_s = 0.0;
};

// Cost accounting for one trajectory.
class CostLedger {
 public:
  void add_round(const RoundCost& round) { rounds_.push_back(round); }
  void add_trigger_tokens(Tokens n) { trigger_tokens_ += n; }

  const std::vector<RoundCost>& rounds() const { return rounds_; }
  std::vector<RoundCost>& mutable_rounds() { return rounds_; }

  Tokens allocated() const;
  Tokens generated() const;
  Tokens snap_tokens() const;
  Tokens prompt_tokens() const;
  Tokens trigger_tokens() const { return trigger_tokens_; }
  int calls() const;
  double wall_time_s() const;

  // Token-cost proxy for runtime: generated tokens plus a prefill charge
  // proportional to every request's prompt length.
  double cost_units(double prefill_cost_per_token) const;

 private:
  std::vector<RoundCost> rounds_;
  Tokens trigger_tokens_ = 0;
};

}  // namespace idsample
