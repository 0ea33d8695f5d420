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

#include <random>

#include "doctest.h"
#include "golden_traces.h"
#include "idsample/engine.h"

using namespace idsample;
using idsample::testing::count_occurrences;
using idsample::testing::kTrigger;
using idsample::testing::scripted;

namespace {

const std::string kPad = "\n" + kTrigger + "\n";

SnapResult snap(const std::string& prefix, std::vector<ScriptEntry> script,
                Tokens allowance = 64, ScriptedBackend** out = nullptr) {
  static thread_local std::unique_ptr<ScriptedBackend> keep;
  keep = std::make_unique<ScriptedBackend>(std::move(script));
  if (out) *out = keep.get();
  StepBoundaryPolicy policy;
  policy.allowance = allowance;
  return snap_to_step_boundary(prefix, *keep, policy);
}

}  // namespace

TEST_CASE("golden scripted traces") {
  for (const auto& g : idsample::testing::all_golden_traces()) {
    CAPTURE(g.name);
    const auto result = idsample::testing::replay(g);
    CHECK_MESSAGE(result.ok, result.mismatch);
  }
}

TEST_CASE("golden trace ledger") {
  const auto g = idsample::testing::exhaust_all_rounds();
  ScriptedBackend backend(g.script);
  const Trajectory t =
      id_sample(g.prompt, g.schedule, TriggerPolicy{}, g.boundary, backend, SamplingParams{});
  const auto& rounds = t.ledger.rounds();
  REQUIRE(rounds.size() == 3);
  CHECK(rounds[0].allocated == 2);
  CHECK(rounds[1].allocated == 4);
  CHECK(rounds[2].allocated == 4);
  CHECK(rounds[0].generated == 5);
  CHECK(rounds[1].generated == 7);
  CHECK(rounds[2].generated == 4);
  CHECK(rounds[0].snap_tokens == 3);
  CHECK(rounds[1].snap_tokens == 3);
  CHECK(rounds[2].snap_tokens == 0);
  CHECK(rounds[0].calls == 2);
  CHECK(rounds[1].calls == 2);
  CHECK(rounds[2].calls == 1);
  // Prompt words: 2 + 4, 19 + 23, 38.
  CHECK(rounds[0].prompt_tokens == 6);
  CHECK(rounds[1].prompt_tokens == 42);
  CHECK(rounds[2].prompt_tokens == 38);
  CHECK(t.ledger.trigger_tokens() == 24);  // two 12-word triggers
  CHECK(t.ledger.generated() == 16);
  CHECK(t.ledger.generated() == backend.tokens_generated());
  CHECK(t.ledger.calls() == 5);
}

TEST_CASE("snap to step boundary") {
  ScriptedBackend* backend = nullptr;

  SUBCASE("already at a boundary: no call") {
    const auto r = snap("step one.\n\n", {}, 64, &backend);
    CHECK(r.outcome == SnapResult::Outcome::kAlreadyAtBoundary);
    CHECK(r.prefix == "step one.\n\n");
    CHECK(r.calls == 0);
    CHECK(backend->prompts().empty());
  }
  SUBCASE("single newline counts as a boundary") {
    const auto r = snap("step one.\n", {}, 64, &backend);
    CHECK(r.outcome == SnapResult::Outcome::kAlreadyAtBoundary);
    CHECK(r.calls == 0);
  }
  SUBCASE("finish the sentence and restore the marker") {
    const auto r = snap("so x", {scripted(" = 4.\n\nnext step", FinishReason::kStop)}, 64,
                        &backend);
    CHECK(r.outcome == SnapResult::Outcome::kBoundary);
    CHECK(r.added == " = 4.\n\n");
    CHECK(r.prefix == "so x = 4.\n\n");
    CHECK(r.tokens == 2);
    CHECK(r.calls == 1);
    REQUIRE(backend->prompts().size() == 1);
    CHECK(backend->prompts()[0] == "so x");
  }
  SUBCASE("earliest marker wins") {
    const auto r = snap("a", {scripted(" b\nc\n\nd", FinishReason::kStop)});
    CHECK(r.added == " b\n");
  }
  SUBCASE("cap at exactly the allowance") {
    const auto r = snap("a", {scripted(" b c d e", FinishReason::kLength)}, 3);
    CHECK(r.outcome == SnapResult::Outcome::kCap);
    CHECK(r.added == " b c d");
    CHECK(r.tokens == 3);
  }
  SUBCASE("allowance words then length") {
    const auto r = snap("a", {scripted(" b c d", FinishReason::kLength)}, 3);
    CHECK(r.outcome == SnapResult::Outcome::kCap);
    CHECK(r.tokens == 3);
  }
  SUBCASE("end of sequence while snapping") {
    const auto r = snap("a", {scripted(" the end", FinishReason::kStop)});
    CHECK(r.outcome == SnapResult::Outcome::kEndOfSequence);
    CHECK(r.prefix == "a the end");
  }
  SUBCASE("zero allowance never calls") {
    const auto r = snap("a b", {}, 0, &backend);
    CHECK(r.outcome == SnapResult::Outcome::kCap);
    CHECK(r.calls == 0);
    CHECK(r.prefix == "a b");
  }
}

TEST_CASE("end of sequence during a snap finishes the trajectory") {
  ScriptedBackend backend({scripted("w1 w2 w3 w4 w5", FinishReason::kLength),
                           scripted(" w5 end", FinishReason::kStop)});
  const Trajectory t = id_sample("P\n", BudgetSchedule(4, 2.0, 32), TriggerPolicy{},
                                 StepBoundaryPolicy{}, backend, SamplingParams{});
  CHECK(t.status == TrajectoryStatus::kFinished);
  REQUIRE(t.rounds.size() == 1);
  CHECK(t.rounds[0].finish == RoundFinish::kStop);
  CHECK(t.rounds[0].text == "w1 w2 w3 w4 w5 end");
  CHECK(t.trigger_count == 0);
  CHECK(t.full_text() == "P\nw1 w2 w3 w4 w5 end");
}

TEST_CASE("pad_trigger") {
  TriggerPolicy policy;
  CHECK(pad_trigger("abc", policy) == "abc" + kPad);
  CHECK(pad_trigger("abc" + kPad, policy) == "abc" + kPad);
  CHECK(pad_trigger("abc " + kTrigger + "  \n", policy) == "abc " + kTrigger + "  \n");
  CHECK_THROWS_AS(pad_trigger("", policy), std::invalid_argument);

  // A trigger mid-text does not count; only a trailing one does.
  const std::string mid = kTrigger + " and more";
  CHECK(pad_trigger(mid, policy) == mid + kPad);

  TriggerPolicy custom;
  custom.trigger_text = "Hmm.";
  custom.separator = " ";
  custom.redundancy_window = 16;
  CHECK(pad_trigger("x", custom) == "x Hmm. ");

  SUBCASE("idempotent") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> pieces = {"a", " ", "\n", "\n\n", "x = 1.", kTrigger, "Wait!"};
    for (int trial = 0; trial < 100; ++trial) {
      std::string prefix = "Q";
      const int len = std::uniform_int_distribution<int>(0, 8)(rng);
      for (int i = 0; i < len; ++i) prefix += pieces[rng() % pieces.size()];
      const std::string once = pad_trigger(prefix, policy);
      CHECK(pad_trigger(once, policy) == once);
      CHECK(once.compare(0, prefix.size(), prefix) == 0);
    }
  }
}

TEST_CASE("policy validation") {
  TriggerPolicy empty;
  empty.trigger_text.clear();
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
  TriggerPolicy narrow;
  narrow.redundancy_window = 4;
  CHECK_THROWS_AS(narrow.validate(), std::invalid_argument);

  StepBoundaryPolicy negative;
  negative.allowance = -1;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
  StepBoundaryPolicy none;
  none.markers.clear();
  CHECK_THROWS_AS(none.validate(), std::invalid_argument);

  ScriptedBackend backend({});
  CHECK_THROWS_AS(id_sample("P", BudgetSchedule(4, 2.0, 8), empty, StepBoundaryPolicy{},
                            backend, SamplingParams{}),
                  std::invalid_argument);
  CHECK(backend.prompts().empty());
}

TEST_CASE("trigger already at the seam is not repeated") {
  // Round 0 is cut right after the model wrote the trigger itself.
  ScriptedBackend backend({
      scripted("x x x x " + kTrigger + " y", FinishReason::kLength),
      scripted("\n\nmore", FinishReason::kStop),
      scripted("done \\boxed{1}", FinishReason::kStop),
  });
  const Trajectory t = id_sample("P\n", BudgetSchedule(16, 2.0, 64), TriggerPolicy{},
                                 StepBoundaryPolicy{}, backend, SamplingParams{});
  REQUIRE(t.rounds.size() == 2);
  CHECK(t.rounds[0].trigger_suppressed);
  CHECK(t.rounds[0].padding.empty());
  CHECK(t.trigger_count == 1);
  CHECK(t.ledger.trigger_tokens() == 0);
  CHECK(t.full_text() == "P\nx x x x " + kTrigger + "\n\ndone \\boxed{1}");
  CHECK(count_occurrences(t.full_text(), kTrigger) == 1);
}

TEST_CASE("is_finished") {
  Round r;
  r.finish = RoundFinish::kStop;
  CHECK(is_finished(r));
  r.finish = RoundFinish::kLength;
  CHECK_FALSE(is_finished(r));
  r.finish = RoundFinish::kBoundarySnapCap;
  CHECK_FALSE(is_finished(r));
}

TEST_CASE("backend failure keeps the partial trajectory") {
  ScriptedBackend backend({scripted("a b c d e", FinishReason::kLength),
                           scripted("\n\n", FinishReason::kStop)});
  try {
    id_sample("P\n", BudgetSchedule(4, 2.0, 32), TriggerPolicy{}, StepBoundaryPolicy{},
              backend, SamplingParams{});
    FAIL("expected a TrajectoryError");
  } catch (const TrajectoryError& e) {
    const Trajectory& partial = e.partial();
    REQUIRE(partial.rounds.size() == 1);
    CHECK(partial.rounds[0].text == "a b c d\n\n");
    CHECK(partial.trigger_count == 1);
    REQUIRE(partial.ledger.rounds().size() == 2);
    CHECK(partial.ledger.rounds()[1].calls == 0);
    CHECK(std::string(e.what()).find("round 1") != std::string::npos);
  }
}

TEST_CASE("sample_once") {
  ScriptedBackend cut({scripted("a b c d e", FinishReason::kLength)});
  const Trajectory t = sample_once("P\n", 3, cut, SamplingParams{});
  CHECK(t.status == TrajectoryStatus::kBudgetExhausted);
  CHECK(t.full_text() == "P\na b c");
  CHECK(t.trigger_count == 0);
  CHECK(t.ledger.generated() == 3);

  ScriptedBackend done({scripted("a b", FinishReason::kStop)});
  const Trajectory u = sample_once("P\n", 3, done, SamplingParams{});
  CHECK(u.status == TrajectoryStatus::kFinished);
  CHECK(u.ledger.generated() == 2);
}

namespace {

struct FuzzCase {
  StochasticModelParams params;
  BudgetSchedule schedule;
  StepBoundaryPolicy boundary;
  std::uint64_t seed;
};

FuzzCase random_case(std::mt19937_64& rng) {
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto uint = [&](Tokens a, Tokens b) { return std::uniform_int_distribution<Tokens>(a, b)(rng); };
  FuzzCase c;
  c.params.p_solve = uni(0, 1);
  c.params.p_correct_on_trigger = uni(0, 1);
  c.params.p_derail_on_trigger = uni(0, 0.3);
  c.params.length.min = uint(1, 50);
  c.params.length.max = c.params.length.min + uint(0, 800);
  c.params.step_words = uint(1, 40);
  const Tokens b0 = uint(1, 64);
  c.schedule = BudgetSchedule(b0, uni(1.05, 3.0), b0 + uint(0, 1500));
  c.boundary.allowance = uint(0, 64);
  c.seed = rng();
  return c;
}

}  // namespace

TEST_CASE("trajectory invariants over random simulated problems") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 400; ++trial) {
    const FuzzCase c = random_case(rng);
    CAPTURE(trial);
    StochasticBackend backend(c.params, c.seed);
    const std::string prompt = "Problem " + std::to_string(trial) + "\n";
    backend.register_problem(prompt, "12");
    SamplingParams sampling;
    sampling.seed = static_cast<std::uint64_t>(trial);
    const Trajectory t =
        id_sample(prompt, c.schedule, TriggerPolicy{}, c.boundary, backend, sampling);
    const auto plan = plan_rounds(c.schedule);

    REQUIRE(!t.rounds.empty());
    REQUIRE(t.rounds.size() <= plan.size());
    Tokens snap_total = 0;
    for (std::size_t k = 0; k < t.rounds.size(); ++k) {
      const Round& r = t.rounds[k];
      const RoundCost& cost = t.ledger.rounds()[k];
      const bool last = k + 1 == t.rounds.size();
      CHECK(r.allocated == plan[k]);
      CHECK(r.used - cost.snap_tokens <= r.allocated);
      CHECK(cost.snap_tokens <= c.boundary.allowance);
      snap_total += cost.snap_tokens;
      if (!last) {
        CHECK_FALSE(is_finished(r));
        CHECK_FALSE(r.trigger_suppressed);
        const bool at_boundary = r.text.ends_with("\n");
        CHECK((at_boundary || r.finish == RoundFinish::kBoundarySnapCap));
        CHECK(r.padding == kPad);
      } else {
        CHECK(r.padding.empty());
      }
    }
    CHECK(t.trigger_count == static_cast<int>(t.rounds.size()) - 1);
    CHECK(t.trigger_count <= rounds_to_exhaust(c.schedule) - 1);
    CHECK((t.status == TrajectoryStatus::kFinished) == is_finished(t.rounds.back()));
    if (t.status == TrajectoryStatus::kBudgetExhausted) CHECK(t.rounds.size() == plan.size());
    CHECK(t.ledger.generated() <= c.schedule.max_total() + snap_total);
    CHECK(t.ledger.generated() == backend.tokens_generated());
    CHECK(count_occurrences(t.full_text(), kTrigger) == t.trigger_count);
    CHECK(t.full_text() == prompt + t.generated_text());
  }
}

TEST_CASE("short answers make iterative deepening identical to one sample") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    StochasticModelParams p;
    p.length.min = 1;
    p.length.max = 64;
    p.p_solve = 0.5;
    StochasticBackend a(p, trial), b(p, trial);
    const std::string prompt = "Q" + std::to_string(trial) + "\n";
    a.register_problem(prompt, "3");
    b.register_problem(prompt, "3");
    SamplingParams sampling;
    sampling.seed = rng();
    const BudgetSchedule schedule(64, 2.0, 4096);
    const Trajectory id =
        id_sample(prompt, schedule, TriggerPolicy{}, StepBoundaryPolicy{}, a, sampling);
    const Trajectory once = sample_once(prompt, schedule.max_total(), b, sampling);
    CHECK(id.full_text() == once.full_text());
    CHECK(id.trigger_count == 0);
    CHECK(id.ledger.generated() == once.ledger.generated());
    CHECK(id.status == TrajectoryStatus::kFinished);
  }
}

TEST_CASE("replay is deterministic") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const FuzzCase c = random_case(rng);
    auto once = [&] {
      StochasticBackend backend(c.params, c.seed);
      backend.register_problem("P\n", "5");
      SamplingParams sampling;
      sampling.seed = 42;
      return id_sample("P\n", c.schedule, TriggerPolicy{}, c.boundary, backend, sampling);
    };
    const Trajectory x = once(), y = once();
    CHECK(x.full_text() == y.full_text());
    CHECK(x.ledger.generated() == y.ledger.generated());
    CHECK(x.ledger.prompt_tokens() == y.ledger.prompt_tokens());
  }
}
