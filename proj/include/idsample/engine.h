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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "idsample/backend.h"
#include "idsample/scheduler.h"

namespace idsample {

inline constexpr std::string_view kDefaultTriggerText =
    "Wait! Maybe I made some mistakes! I need to rethink from scratch.";

struct TriggerPolicy {
  std::string trigger_text{kDefaultTriggerText};
  std::string separator = "\n";
  // Characters at the end of the prefix searched for an existing trigger.
  std::size_t redundancy_window = 256;

  void validate() const;
};

struct StepBoundaryPolicy {
  Tokens allowance = 64;
  // Tried in order; the first is preferred when several match at one spot.
  std::vector<std::string> markers = {"\n\n", "\n"};

  void validate() const;
};

struct SamplingParams {
  double temperature = 0.7;
  double top_p = 1.0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> stop;
};

enum class RoundFinish { kStop, kLength, kBoundarySnapCap };
enum class TrajectoryStatus { kFinished, kBudgetExhausted };

std::string_view to_string(RoundFinish finish);
std::string_view to_string(TrajectoryStatus status);

struct Round {
  std::string text;       // generated text, including any boundary snap
  Tokens allocated = 0;   // max_tokens of the round's main request
  Tokens used = 0;        // generated tokens, snap included
  RoundFinish finish = RoundFinish::kLength;
  std::string padding;    // appended after the round (separator + trigger)
  bool trigger_suppressed = false;
};

struct Trajectory {
  std::string prompt;
  std::vector<Round> rounds;
  // Trigger points: rounds that ended unfinished and were followed by another.
  int trigger_count = 0;
  TrajectoryStatus status = TrajectoryStatus::kBudgetExhausted;
  CostLedger ledger;

  // Everything after the prompt: rounds with their padding.
  std::string generated_text() const;
  std::string full_text() const { return prompt + generated_text(); }
};

// A backend failure mid-trajectory; carries the rounds completed so far.
class TrajectoryError : public std::runtime_error {
 public:
  TrajectoryError(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// prefix + separator + trigger + separator, unless the prefix (ignoring
// trailing whitespace) already ends with the trigger within the redundancy
// window. Throws std::invalid_argument for an empty prefix.
std::string pad_trigger(std::string_view prefix, const TriggerPolicy& policy);

struct SnapResult {
  enum class Outcome { kAlreadyAtBoundary, kBoundary, kCap, kEndOfSequence };
  std::string prefix;  // the extended prefix
  std::string added;   // text appended to the input prefix
  Tokens tokens = 0;
  int calls = 0;
  Tokens prompt_tokens = 0;
  Outcome outcome = Outcome::kAlreadyAtBoundary;
};

// Extends a length-cut prefix to the next reasoning-step boundary, spending
// at most policy.allowance extra tokens.
SnapResult snap_to_step_boundary(std::string_view prefix, CompletionBackend& backend,
                                 const StepBoundaryPolicy& policy,
                                 const SamplingParams& sampling = {});

// A round is finished only when the generator stopped on its own.
bool is_finished(const Round& round);

// Iterative deepening: continue the prefix under geometrically growing
// budgets, inserting the trigger between unfinished rounds, until a round
// stops naturally or the planned rounds run out.
Trajectory id_sample(std::string_view prompt, const BudgetSchedule& schedule,
                     const TriggerPolicy& policy, const StepBoundaryPolicy& boundary,
                     CompletionBackend& backend, const SamplingParams& sampling);

// Vanilla sampling: one request with max_tokens = max_tokens and no triggers.
Trajectory sample_once(std::string_view prompt, Tokens max_tokens,
                       CompletionBackend& backend, const SamplingParams& sampling);

}  // namespace idsample
