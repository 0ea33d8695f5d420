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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "idsample/harness.h"

using namespace idsample;
namespace fs = std::filesystem;

namespace {

std::vector<Problem> problems(int count, const std::string& tag = "p") {
  const std::vector<std::string> golds = {"12", "1/2", "7", "\\sqrt{2}", "3"};
  std::vector<Problem> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({tag + std::to_string(i), "Problem " + tag + std::to_string(i) + ": solve it.",
                   golds[i % golds.size()]});
  }
  return out;
}

RunConfig small_config(Method method = Method::kIdSampling) {
  RunConfig c;
  c.method = method;
  c.n = 4;
  c.schedule = BudgetSchedule(32, 2.0, 512);
  c.backend.simulator.length.min = 20;
  // A restarted attempt must fit in one round; the 256 round covers 250.
  c.backend.simulator.length.max = 250;
  c.scorer.kind = "stub";
  c.seed = 7;
  return c;
}

// Fails every request whose prompt mentions "broken".
class FlakyBackend : public CompletionBackend {
 public:
  explicit FlakyBackend(CompletionBackend& inner) : inner_(inner) {}
  std::vector<CompletionResult> complete(const CompletionRequest& request) override {
    if (request.prompt.find("broken") != std::string::npos) throw TransportError("down");
    return inner_.complete(request);
  }
  std::string name() const override { return inner_.name(); }

 private:
  CompletionBackend& inner_;
};

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("idsample_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("dataset parsing") {
  SUBCASE("well formed, blank lines skipped") {
    std::istringstream in(
        "{\"id\": \"a\", \"question\": \"1+1?\", \"answer\": \"2\"}\n"
        "\n"
        "{\"id\": 2, \"question\": \"2+2?\", \"answer\": 4}\n"
        "{\"id\": \"c\", \"question\": \"half?\", \"answer\": \"\\\\frac{1}{2}\"}\n");
    const auto ps = parse_dataset(in);
    REQUIRE(ps.size() == 3);
    CHECK(ps[0].id == "a");
    CHECK(ps[1].id == "2");
    CHECK(ps[1].gold_answer == "4");
    CHECK(ps[2].gold_answer == "\\frac{1}{2}");
  }
  SUBCASE("missing answer names the line") {
    std::istringstream in(
        "{\"id\": \"a\", \"question\": \"q\", \"answer\": \"1\"}\n"
        "{\"id\": \"b\", \"question\": \"q\"}\n");
    try {
      parse_dataset(in, "data.jsonl");
      FAIL("expected a DatasetError");
    } catch (const DatasetError& e) {
      CHECK(std::string(e.what()).find("data.jsonl:2") != std::string::npos);
      CHECK(std::string(e.what()).find("answer") != std::string::npos);
    }
  }
  SUBCASE("malformed JSON names the line") {
    std::istringstream in("{\"id\": \"a\", \"question\": \"q\", \"answer\": \"1\"}\n{oops\n");
    CHECK_THROWS_WITH_AS(parse_dataset(in, "d"), doctest::Contains("d:2"), DatasetError);
  }
  SUBCASE("duplicate id") {
    std::istringstream in(
        "{\"id\": \"a\", \"question\": \"q\", \"answer\": \"1\"}\n"
        "{\"id\": \"a\", \"question\": \"r\", \"answer\": \"2\"}\n");
    CHECK_THROWS_WITH_AS(parse_dataset(in), doctest::Contains("duplicate"), DatasetError);
  }
  SUBCASE("empty question") {
    std::istringstream in("{\"id\": \"a\", \"question\": \"\", \"answer\": \"1\"}\n");
    CHECK_THROWS_AS(parse_dataset(in), DatasetError);
  }
  SUBCASE("empty file") {
    std::istringstream in("");
    CHECK(parse_dataset(in).empty());
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/data.jsonl"), DatasetError);
  }
}

TEST_CASE("empty dataset gives an empty report") {
  const RunReport r = run({}, small_config());
  CHECK(r.questions_total == 0);
  CHECK(r.questions.empty());
  CHECK(r.pass_at_1 == 0.0);
  CHECK(r.totals.generated == 0);
}

TEST_CASE("dataset fingerprint") {
  const auto a = problems(5);
  auto b = a;
  b[3].gold_answer = "13";
  CHECK(dataset_fingerprint(a).size() == 16);
  CHECK(dataset_fingerprint(a) == dataset_fingerprint(problems(5)));
  CHECK(dataset_fingerprint(a) != dataset_fingerprint(b));
}

TEST_CASE("prompts and seeds") {
  RunConfig c;
  c.prompt_template = "Solve: {question}\nAnswer:";
  CHECK(render_prompt(c, {"x", "1+1", "2"}) == "Solve: 1+1\nAnswer:");
  CHECK(sample_seed(1, "q", 0) == sample_seed(1, "q", 0));
  CHECK(sample_seed(1, "q", 0) != sample_seed(1, "q", 1));
  CHECK(sample_seed(1, "q", 0) != sample_seed(2, "q", 0));
  CHECK(sample_seed(1, "q", 0) != sample_seed(1, "r", 0));
}

TEST_CASE("k grid and equivalent N") {
  CHECK(k_grid(1) == std::vector<int>{1});
  CHECK(k_grid(8) == std::vector<int>{1, 2, 4, 8});
  CHECK(k_grid(6) == std::vector<int>{1, 2, 4, 6});
  CHECK(k_grid(32) == std::vector<int>{1, 2, 4, 8, 16, 32});
  CHECK_THROWS_AS(k_grid(0), std::invalid_argument);

  CHECK(equivalent_n(8, 1.9) == 16);
  CHECK(equivalent_n(8, 1.0) == 8);
  CHECK(equivalent_n(4, 2.3) == 12);
  CHECK(equivalent_n(1, 3.0) == 3);
  CHECK_THROWS_AS(equivalent_n(0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(equivalent_n(8, 0.9), std::invalid_argument);
}

TEST_CASE("config parsing") {
  const nlohmann::json j = {
      {"name", "fast"},
      {"method", "vanilla"},
      {"n", 4},
      {"initial_budget", 16},
      {"gamma", 1.5},
      {"max_total_tokens", 512},
      {"trigger_text", "Hmm, let me check."},
      {"backend", {{"kind", "scripted"}, {"script", "script.json"}}},
      {"scorer", {{"kind", "none"}}},
      {"parallelism", 3},
      {"seed", 11},
  };
  const RunConfig c = RunConfig::from_json(j, "/tmp/cfg");
  CHECK(c.name == "fast");
  CHECK(c.method == Method::kVanilla);
  CHECK(c.n == 4);
  CHECK(c.schedule == BudgetSchedule(16, 1.5, 512));
  CHECK(c.trigger.trigger_text == "Hmm, let me check.");
  CHECK(c.backend.kind == "scripted");
  CHECK(c.backend.script == fs::path("/tmp/cfg/script.json"));
  CHECK(c.scorer.kind == "none");
  CHECK(c.parallelism == 3);
  CHECK(c.seed == 11);

  // Serialized configs parse back to the same thing.
  CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());

  SUBCASE("simulator follows the configured trigger") {
    const RunConfig s = RunConfig::from_json(
        {{"trigger_text", "Check again."}, {"backend", {{"kind", "stochastic"}}}});
    CHECK(s.backend.simulator.trigger_text == "Check again.");
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(RunConfig::from_json({{"nn", 4}}), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json({{"backend", {{"kind", "stochastic"}, {"urll", "x"}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json({{"method", "beam"}}), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json({{"n", 0}}), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json({{"gamma", 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json({{"backend", {{"kind", "grpc"}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json({{"scorer", {{"kind", "oracle"}}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json({{"prompt_template", "no placeholder"}}),
                    std::invalid_argument);
  }
}

TEST_CASE("a solver that always succeeds scores 1.0 everywhere") {
  RunConfig c;  // default schedule and simulator
  c.n = 4;
  c.backend.simulator.p_solve = 1.0;
  const RunReport r = run(problems(20), c);
  CHECK(r.questions_total == 20);
  CHECK(r.questions_errored == 0);
  CHECK(r.pass_at_1 == 1.0);
  CHECK(r.mean_sample_accuracy == 1.0);
  REQUIRE(r.curve.size() == 3);
  for (const auto& p : r.curve) {
    CHECK(p.cons == 1.0);
    REQUIRE(p.bon);
    CHECK(*p.bon == 1.0);
  }
}

TEST_CASE("report invariants on a mixed run") {
  RunConfig c = small_config();
  c.n = 8;
  c.backend.simulator.p_solve = 0.3;
  const auto ps = problems(60);
  auto backend = make_backend(c, ps);
  auto scorer = make_scorer(c);
  const RunReport r = run(ps, c, *backend, scorer.get());

  CHECK(r.ks == std::vector<int>{1, 2, 4, 8});
  REQUIRE(r.curve.size() == 4);
  CHECK(r.curve[0].cons == r.pass_at_1);
  REQUIRE(r.curve[0].bon);
  CHECK(*r.curve[0].bon == r.pass_at_1);
  for (std::size_t g = 0; g < r.curve.size(); ++g) {
    CHECK(r.curve[g].cons >= 0.0);
    CHECK(r.curve[g].cons <= 1.0);
    // The default stub scorer ranks by correctness, so BoN@k is "any of k".
    if (g > 0) CHECK(*r.curve[g].bon >= *r.curve[g - 1].bon);
  }
  CHECK(r.pass_at_1 > 0.0);
  CHECK(r.pass_at_1 < 1.0);

  SUBCASE("token accounting matches the backend") {
    CHECK(r.totals.generated == backend->tokens_generated());
    Tokens sum = 0;
    for (const auto& q : r.questions) {
      for (const auto& s : q.samples) sum += s.generated;
    }
    CHECK(sum == r.totals.generated);
  }
  SUBCASE("per-sample records") {
    for (const auto& q : r.questions) {
      REQUIRE(q.samples.size() == 8);
      CHECK(q.cons_correct.size() == 4);
      CHECK(q.bon_correct.size() == 4);
      for (const auto& s : q.samples) {
        CHECK(s.trigger_count == s.rounds - 1);
        CHECK(s.score);
        CHECK((s.status == "finished" || s.status == "budget_exhausted"));
        CHECK(s.cost_units == doctest::Approx(s.generated + 0.01 * s.prompt_tokens));
      }
    }
  }
}

TEST_CASE("vanilla runs one round per sample") {
  RunConfig c = small_config(Method::kVanilla);
  const RunReport r = run(problems(10), c);
  CHECK(r.method == "vanilla");
  for (const auto& q : r.questions) {
    for (const auto& s : q.samples) {
      CHECK(s.rounds == 1);
      CHECK(s.trigger_count == 0);
      CHECK(s.allocated == 512);
      CHECK(s.calls == 1);
    }
  }
}

TEST_CASE("no scorer means no best-of-n") {
  RunConfig c = small_config();
  c.scorer.kind = "none";
  const RunReport r = run(problems(5), c);
  for (const auto& p : r.curve) CHECK_FALSE(p.bon);
  for (const auto& q : r.questions) CHECK(q.bon_correct.empty());
}

TEST_CASE("errored questions leave the denominators") {
  RunConfig c = small_config();
  c.backend.simulator.p_solve = 1.0;
  auto ps = problems(4);
  ps[1].question = "This one is broken.";
  StochasticModelParams params = c.backend.simulator;
  StochasticBackend inner(params, c.seed);
  for (const auto& p : ps) inner.register_problem(render_prompt(c, p), p.gold_answer);
  FlakyBackend flaky(inner);
  StubScorer scorer(c.scorer.stub);
  const RunReport r = run(ps, c, flaky, &scorer);

  CHECK(r.questions_total == 4);
  CHECK(r.questions_errored == 1);
  CHECK(r.questions[1].errored);
  CHECK(r.questions[1].error.find("down") != std::string::npos);
  CHECK(r.questions[1].samples[0].status == "error");
  CHECK(r.questions[1].cons_correct.empty());
  // The other three are all right, so accuracy is 3/3, not 3/4.
  CHECK(r.pass_at_1 == 1.0);
  CHECK(r.curve.back().cons == 1.0);
}

TEST_CASE("a failing scorer marks the question errored") {
  class BrokenScorer : public RewardScorer {
   public:
    double score(const ScoreRequest& r) override {
      if (r.question.find("p2") != std::string::npos) throw TransportError("scorer down");
      return 1.0;
    }
    std::string name() const override { return "broken"; }
  } scorer;
  RunConfig c = small_config();
  const auto ps = problems(4);
  auto backend = make_backend(c, ps);
  const RunReport r = run(ps, c, *backend, &scorer);
  CHECK(r.questions_errored == 1);
  CHECK(r.questions[2].errored);
  CHECK(r.questions[2].error.find("scoring failed") != std::string::npos);
}

TEST_CASE("runs are deterministic across repeats and parallelism") {
  RunConfig c = small_config();
  c.n = 8;
  const auto ps = problems(25);
  const std::string once = deterministic_dump(run(ps, c));
  CHECK(deterministic_dump(run(ps, c)) == once);
  c.parallelism = 8;
  CHECK(deterministic_dump(run(ps, c)) == once);
  CHECK(once.find("wall_time_s") == std::string::npos);
  CHECK(once.find("latency_s") == std::string::npos);

  c.seed = 8;
  CHECK(deterministic_dump(run(ps, c)) != once);
}

TEST_CASE("reports round-trip and land on disk") {
  RunConfig vc = small_config(Method::kVanilla);
  vc.name = "vanilla";
  const auto ps = problems(12);
  const RunReport base = run(ps, vc);

  RunConfig ic = small_config();
  ic.name = "id";
  RunReport id = run(ps, ic);
  attach_baseline(id, base);
  REQUIRE(id.relative);
  CHECK(id.relative->baseline == "vanilla");
  CHECK(id.relative->relative_cost ==
        doctest::Approx(id.totals.cost_units / base.totals.cost_units));
  CHECK(id.relative->equivalent_n.size() == id.ks.size());

  CHECK(RunReport::from_json(id.to_json()).to_json() == id.to_json());

  const fs::path dir = scratch_dir("report");
  write_report(id, dir);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "curves.csv"));
  CHECK(fs::exists(dir / "plot.dat"));
  CHECK(load_report(dir).to_json() == id.to_json());
  CHECK(load_report(dir / "report.json").name == "id");
  std::ifstream csv(dir / "curves.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "name,method,k,bon,cons,pass_at_1");

  SUBCASE("baseline from config") {
    const fs::path bdir = scratch_dir("baseline");
    write_report(base, bdir);
    ic.baseline_report = bdir;
    const RunReport again = run(ps, ic);
    REQUIRE(again.relative);
    CHECK(again.relative->relative_cost == doctest::Approx(id.relative->relative_cost));
  }
  SUBCASE("baseline on another dataset") {
    RunReport other = run(problems(12, "z"), vc);
    CHECK_THROWS_AS(attach_baseline(id, other), ComparisonError);
  }
}

TEST_CASE("compare_runs") {
  const auto ps = problems(15);
  RunConfig vc = small_config(Method::kVanilla);
  vc.name = "vanilla";
  const RunReport base = run(ps, vc);

  SUBCASE("a run against itself") {
    const Comparison cmp = compare_runs({base, base});
    REQUIRE(cmp.rows.size() == 2);
    CHECK(cmp.rows[0].relative_time == 1.0);
    CHECK(cmp.rows[1].relative_time == 1.0);
    CHECK(cmp.rows[1].pass_at_1_delta == 0.0);
    for (double d : cmp.rows[1].cons_delta) CHECK(d == 0.0);
    CHECK(cmp.to_text().find("1.00") != std::string::npos);
  }
  SUBCASE("identical ID runs have zero deltas") {
    RunConfig ic = small_config();
    ic.name = "id";
    const RunReport a = run(ps, ic), b = run(ps, ic);
    const Comparison cmp = compare_runs({base, a, b});
    REQUIRE(cmp.rows.size() == 3);
    CHECK(cmp.rows[1].relative_time > 1.0);
    CHECK(cmp.rows[2].relative_time == cmp.rows[1].relative_time);
    CHECK(cmp.rows[2].pass_at_1 == cmp.rows[1].pass_at_1);
    CHECK(cmp.rows[1].cons == cmp.rows[2].cons);
    const std::string csv = cmp.to_csv();
    CHECK(csv.rfind("name,method,relative_time,k,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 3);
    CHECK(cmp.to_json()["rows"].size() == 3);
  }
  SUBCASE("mismatches") {
    CHECK_THROWS_AS(compare_runs({base, run(problems(15, "z"), vc)}), ComparisonError);
    RunConfig other = vc;
    other.n = 2;
    CHECK_THROWS_AS(compare_runs({base, run(ps, other)}), ComparisonError);
    CHECK_THROWS_AS(compare_runs({}), ComparisonError);
  }
}
