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

#include "idsample/scheduler.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace idsample {

namespace {

// Large enough for any realistic budget, small enough that sums of a few
// hundred rounds cannot overflow.
constexpr Tokens kBudgetCeiling = Tokens{1} << 52;

}  // namespace

BudgetSchedule::BudgetSchedule()
    : BudgetSchedule(kDefaultInitialBudget, kDefaultGrowthFactor,
                     kDefaultMaxTotal) {}

BudgetSchedule::BudgetSchedule(Tokens initial_budget, double growth_factor,
                               Tokens max_total)
    : initial_budget_(initial_budget),
      growth_factor_(growth_factor),
      max_total_(max_total) {
  if (!std::isfinite(growth_factor) || !(growth_factor > 1.0)) {
    throw std::invalid_argument("growth factor must be > 1, got " +
                                std::to_string(growth_factor));
  }
  if (initial_budget < 1) {
    throw std::invalid_argument("initial budget must be >= 1");
  }
  if (max_total < initial_budget) {
    throw std::invalid_argument("max total tokens (" +
                                std::to_string(max_total) +
                                ") must be >= initial budget (" +
                                std::to_string(initial_budget) + ")");
  }
}

Tokens round_budget(const BudgetSchedule& schedule, int k) {
  if (k < 0) {
    throw std::invalid_argument("round index must be >= 0");
  }
  const long double value =
      static_cast<long double>(schedule.initial_budget()) *
      std::pow(static_cast<long double>(schedule.growth_factor()), k);
  if (!(value < static_cast<long double>(kBudgetCeiling))) {
    return kBudgetCeiling;
  }
  // Decimal gammas are not exact in binary; 100 * 1.2^2 must give 144.
  const long double nearest = std::nearbyint(value);
  long double floored = std::floor(value);
  if (std::fabs(value - nearest) <= 1e-12L * std::max(1.0L, value)) {
    floored = nearest;
  }
  return std::max<Tokens>(1, static_cast<Tokens>(floored));
}

std::vector<Tokens> plan_rounds(const BudgetSchedule& schedule) {
  std::vector<Tokens> rounds;
  Tokens cumulative = 0;
  for (int k = 0;; ++k) {
    const Tokens budget = round_budget(schedule, k);
    if (cumulative + budget >= schedule.max_total()) {
      rounds.push_back(schedule.max_total() - cumulative);
      return rounds;
    }
    rounds.push_back(budget);
    cumulative += budget;
  }
}

int rounds_to_exhaust(const BudgetSchedule& schedule) {
  return static_cast<int>(plan_rounds(schedule).size());
}

double overhead_bound(double gamma, Tokens final_round_budget) {
  if (!(gamma > 1.0)) {
    throw std::invalid_argument("overhead bound requires gamma > 1");
  }
  if (final_round_budget < 1) {
    throw std::invalid_argument("final round budget must be >= 1");
  }
  return gamma / (gamma - 1.0) * static_cast<double>(final_round_budget);
}

double overhead_bound_on_length(double gamma, Tokens trajectory_length) {
  if (!(gamma > 1.0)) {
    throw std::invalid_argument("overhead bound requires gamma > 1");
  }
  return gamma / (gamma - 1.0) * static_cast<double>(trajectory_length);
}

Tokens CostLedger::allocated() const {
  return std::accumulate(rounds_.begin(), rounds_.end(), Tokens{0},
                         [](Tokens acc, const RoundCost& r) {
                           return acc + r.allocated;
                         });
}

Tokens CostLedger::generated() const {
  return std::accumulate(rounds_.begin(), rounds_.end(), Tokens{0},
                         [](Tokens acc, const RoundCost& r) {
                           return acc + r.generated;
                         });
}

Tokens CostLedger::snap_tokens() const {
  return std::accumulate(rounds_.begin(), rounds_.end(), Tokens{0},
                         [](Tokens acc, const RoundCost& r) {
                           return acc + r.snap_tokens;
                         });
}

Tokens CostLedger::prompt_tokens() const {
  return std::accumulate(rounds_.begin(), rounds_.end(), Tokens{0},
                         [](Tokens acc, const RoundCost& r) {
                           return acc + r.prompt_tokens;
                         });
}

int CostLedger::calls() const {
  int total = 0;
  for (const auto& r : rounds_) total += r.calls;
  return total;
}

double CostLedger::wall_time_s() const {
  double total = 0.0;
  for (const auto& r : rounds_) total += r.wall_time_s;
  return total;
}

double CostLedger::cost_units(double prefill_cost_per_token) const {
  return static_cast<double>(generated()) +
         prefill_cost_per_token * static_cast<double>(prompt_tokens());
}

}  // namespace idsample
