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

#include "idsample/engine.h"

#include <cctype>
#include <chrono>

namespace idsample {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

CompletionRequest make_request(std::string prompt, Tokens max_tokens,
                               const SamplingParams& sampling) {
  CompletionRequest req;
  req.prompt = std::move(prompt);
  req.max_tokens = max_tokens;
  req.stop = sampling.stop;
  req.temperature = sampling.temperature;
  req.top_p = sampling.top_p;
  req.seed = sampling.seed;
  req.n = 1;
  return req;
}

CompletionResult complete_one(CompletionBackend& backend, const CompletionRequest& req) {
  auto results = backend.complete(req);
  if (results.size() != 1) {
    throw ProtocolError("backend returned " + std::to_string(results.size()) +
                        " results for n=1");
  }
  return std::move(results.front());
}

}  // namespace

std::string_view to_string(RoundFinish finish) {
  switch (finish) {
    case RoundFinish::kStop: return "stop";
    case RoundFinish::kLength: return "length";
    case RoundFinish::kBoundarySnapCap: return "boundary_snap_cap";
  }
  return "unknown";
}

std::string_view to_string(TrajectoryStatus status) {
  return status == TrajectoryStatus::kFinished ? "finished" : "budget_exhausted";
}

void TriggerPolicy::validate() const {
  if (trigger_text.empty()) throw std::invalid_argument("trigger text must be nonempty");
  if (redundancy_window < trigger_text.size()) {
    throw std::invalid_argument("redundancy window shorter than the trigger text");
  }
}

void StepBoundaryPolicy::validate() const {
  if (allowance < 0) throw std::invalid_argument("snap allowance must be >= 0");
  if (markers.empty()) throw std::invalid_argument("at least one boundary marker");
  for (const auto& m : markers) {
    if (m.empty()) throw std::invalid_argument("boundary markers must be nonempty");
  }
}

std::string Trajectory::generated_text() const {
  std::string out;
  for (const auto& r : rounds) {
    out += r.text;
    out += r.padding;
  }
  return out;
}

std::string pad_trigger(std::string_view prefix, const TriggerPolicy& policy) {
  if (prefix.empty()) throw std::invalid_argument("cannot pad an empty prefix");
  std::string_view trimmed = prefix;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
    trimmed.remove_suffix(1);
  }
  const std::size_t window = std::min(policy.redundancy_window, trimmed.size());
  if (ends_with(trimmed.substr(trimmed.size() - window), policy.trigger_text)) {
    return std::string(prefix);
  }
  std::string out;
  out.reserve(prefix.size() + policy.trigger_text.size() + 2 * policy.separator.size());
  out.append(prefix);
  out.append(policy.separator);
  out.append(policy.trigger_text);
  out.append(policy.separator);
  return out;
}

SnapResult snap_to_step_boundary(std::string_view prefix, CompletionBackend& backend,
                                 const StepBoundaryPolicy& policy,
                                 const SamplingParams& sampling) {
  SnapResult out;
  out.prefix = std::string(prefix);
  for (const auto& marker : policy.markers) {
    if (ends_with(prefix, marker)) return out;
  }
  if (policy.allowance == 0) {
    out.outcome = SnapResult::Outcome::kCap;
    return out;
  }

  CompletionRequest req = make_request(out.prefix, policy.allowance, sampling);
  req.stop = policy.markers;
  out.prompt_tokens = backend.count_tokens(req.prompt);
  CompletionResult r = complete_one(backend, req);
  out.calls = 1;
  out.tokens = r.tokens_used;
  out.added = std::move(r.text);
  if (r.finish_reason == FinishReason::kLength) {
    out.outcome = SnapResult::Outcome::kCap;
  } else if (r.matched_stop) {
    // Servers drop the stop sequence from the text; restore it.
    out.added += *r.matched_stop;
    out.outcome = SnapResult::Outcome::kBoundary;
  } else {
    out.outcome = SnapResult::Outcome::kEndOfSequence;
  }
  out.prefix += out.added;
  return out;
}

bool is_finished(const Round& round) { return round.finish == RoundFinish::kStop; }

Trajectory id_sample(std::string_view prompt, const BudgetSchedule& schedule,
                     const TriggerPolicy& policy, const StepBoundaryPolicy& boundary,
                     CompletionBackend& backend, const SamplingParams& sampling) {
  policy.validate();
  boundary.validate();
  const std::vector<Tokens> plan = plan_rounds(schedule);

  Trajectory t;
  t.prompt = std::string(prompt);
  std::string prefix = t.prompt;

  for (std::size_t k = 0; k < plan.size(); ++k) {
    const bool last = k + 1 == plan.size();
    const auto start = Clock::now();
    Round round;
    round.allocated = plan[k];
    RoundCost cost;
    cost.allocated = plan[k];

    try {
      const CompletionRequest req = make_request(prefix, plan[k], sampling);
      cost.prompt_tokens += backend.count_tokens(req.prompt);
      CompletionResult r = complete_one(backend, req);
      ++cost.calls;
      round.used = r.tokens_used;
      round.finish = r.finish_reason == FinishReason::kStop ? RoundFinish::kStop
                                                            : RoundFinish::kLength;
      prefix += r.text;
      round.text = std::move(r.text);

      // Triggers go only at step boundaries, so extend a cut round first.
      if (!is_finished(round) && !last) {
        SnapResult snap = snap_to_step_boundary(prefix, backend, boundary, sampling);
        cost.calls += snap.calls;
        cost.prompt_tokens += snap.prompt_tokens;
        cost.snap_tokens = snap.tokens;
        round.used += snap.tokens;
        round.text += snap.added;
        prefix = std::move(snap.prefix);
        if (snap.outcome == SnapResult::Outcome::kEndOfSequence) {
          round.finish = RoundFinish::kStop;
        } else if (snap.outcome == SnapResult::Outcome::kCap) {
          round.finish = RoundFinish::kBoundarySnapCap;
        }
      }
    } catch (const BackendError& e) {
      cost.wall_time_s = seconds_since(start);
      cost.generated = round.used;
      t.ledger.add_round(cost);
      throw TrajectoryError(std::string("round ") + std::to_string(k) + ": " + e.what(),
                            std::move(t));
    }

    cost.generated = round.used;
    cost.wall_time_s = seconds_since(start);
    t.ledger.add_round(cost);

    if (is_finished(round)) {
      t.rounds.push_back(std::move(round));
      t.status = TrajectoryStatus::kFinished;
      return t;
    }
    if (last) {
      t.rounds.push_back(std::move(round));
      t.status = TrajectoryStatus::kBudgetExhausted;
      return t;
    }

    std::string padded = pad_trigger(prefix, policy);
    round.padding = padded.substr(prefix.size());
    round.trigger_suppressed = round.padding.empty();
    t.ledger.add_trigger_tokens(backend.count_tokens(round.padding));
    prefix = std::move(padded);
    ++t.trigger_count;
    t.rounds.push_back(std::move(round));
  }
  return t;  // unreachable: plan_rounds never returns an empty plan
}

Trajectory sample_once(std::string_view prompt, Tokens max_tokens,
                       CompletionBackend& backend, const SamplingParams& sampling) {
  Trajectory t;
  t.prompt = std::string(prompt);
  const auto start = Clock::now();
  RoundCost cost;
  cost.allocated = max_tokens;
  Round round;
  round.allocated = max_tokens;
  try {
    const CompletionRequest req = make_request(t.prompt, max_tokens, sampling);
    cost.prompt_tokens = backend.count_tokens(req.prompt);
    CompletionResult r = complete_one(backend, req);
    cost.calls = 1;
    round.used = r.tokens_used;
    round.finish = r.finish_reason == FinishReason::kStop ? RoundFinish::kStop
                                                          : RoundFinish::kLength;
    round.text = std::move(r.text);
  } catch (const BackendError& e) {
    cost.wall_time_s = seconds_since(start);
    t.ledger.add_round(cost);
    throw TrajectoryError(e.what(), std::move(t));
  }
  cost.generated = round.used;
  cost.wall_time_s = seconds_since(start);
  t.ledger.add_round(cost);
  t.status = is_finished(round) ? TrajectoryStatus::kFinished
                                : TrajectoryStatus::kBudgetExhausted;
  t.rounds.push_back(std::move(round));
  return t;
}

}  // namespace idsample
