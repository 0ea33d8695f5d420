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
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "idsample/aggregation.h"
#include "idsample/backend.h"
#include "idsample/engine.h"
#include "idsample/scheduler.h"
#include "json.hpp"

namespace idsample {

// --- dataset ------------------------------------------------------------------

struct Problem {
  std::string id;
  std::string question;
  std::string gold_answer;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON lines of {"id", "question", "answer"}; blank lines are skipped.
// Errors name the offending line. Ids may be strings or integers.
std::vector<Problem> parse_dataset(std::istream& in, const std::string& source = "<input>");
std::vector<Problem> load_dataset(const std::filesystem::path& path);

// Hash of ids, questions and answers in order; reports from different
// datasets never compare.
std::string dataset_fingerprint(const std::vector<Problem>& problems);

// --- configuration --------------------------------------------------------------

enum class Method { kVanilla, kIdSampling };

std::string_view to_string(Method method);
Method method_from_string(std::string_view text);

struct BackendSelection {
  std::string kind = "stochastic";  // stochastic | scripted | http
  std::string base_url = "http://127.0.0.1:8000";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_s = 600.0;
  int max_in_flight = 16;
  std::filesystem::path script;      // scripted: JSON script file
  StochasticModelParams simulator;   // stochastic
};

struct ScorerSelection {
  std::string kind = "stub";  // stub | http | none
  StubScorerConfig stub;
  std::string base_url = "http://127.0.0.1:8001";
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_s = 120.0;
};

struct RunConfig {
  std::string name;
  Method method = Method::kIdSampling;
  int n = 8;
  BudgetSchedule schedule;
  TriggerPolicy trigger;
  StepBoundaryPolicy boundary;
  double temperature = 0.7;
  double top_p = 1.0;
  std::vector<std::string> stop;
  BackendSelection backend;
  ScorerSelection scorer;
  int parallelism = 1;
  std::uint64_t seed = 0;
  // "{question}" is replaced by the problem text.
  std::string prompt_template = "{question}\n";
  // Prefill charge per prompt token in the token-cost proxy.
  double prefill_cost_per_token = 0.01;
  // Report to compute relative cost and equivalent N against.
  std::optional<std::filesystem::path> baseline_report;

  void validate() const;
  // Relative paths (script, baseline_report) resolve against base_dir.
  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
};

RunConfig load_config(const std::filesystem::path& path);

std::string render_prompt(const RunConfig& config, const Problem& problem);

// Per-sample request seed: a function of the run seed, problem id and
// sample index only, so scheduling order never matters.
std::uint64_t sample_seed(std::uint64_t run_seed, const std::string& problem_id,
                          int sample_index);

// Builds the configured backend. Stochastic backends get every problem
// registered under its rendered prompt. The API key is read from the
// environment variable named by api_key_env.
std::unique_ptr<CompletionBackend> make_backend(const RunConfig& config,
                                                const std::vector<Problem>& problems);
// nullptr for scorer kind "none".
std::unique_ptr<RewardScorer> make_scorer(const RunConfig& config);

// --- reports ------------------------------------------------------------------

struct SampleRecord {
  std::string response;
  std::string answer;     // extracted text, empty when none
  std::string canonical;  // display form of the parsed answer
  bool correct = false;
  std::optional<double> score;
  std::string status;     // finished | budget_exhausted | error
  int rounds = 0;
  int trigger_count = 0;
  Tokens allocated = 0;
  Tokens generated = 0;
  Tokens snap_tokens = 0;
  Tokens prompt_tokens = 0;
  Tokens trigger_tokens = 0;
  int calls = 0;
  double cost_units = 0.0;
  double latency_s = 0.0;
  std::string error;
};

struct QuestionRecord {
  std::string id;
  std::string gold_answer;
  bool errored = false;
  std::string error;
  std::vector<SampleRecord> samples;
  // Parallel to RunReport::ks.
  std::vector<int> bon_correct;   // empty without a scorer
  std::vector<int> cons_correct;
};

struct CurvePoint {
  int k = 0;
  std::optional<double> bon;  // absent without a scorer
  double cons = 0.0;
};

struct Totals {
  Tokens allocated = 0;
  Tokens generated = 0;
  Tokens snap_tokens = 0;
  Tokens prompt_tokens = 0;
  Tokens trigger_tokens = 0;
  std::int64_t calls = 0;
  double cost_units = 0.0;
  double wall_time_s = 0.0;
};

struct EquivalentNRow {
  int actual_n = 0;
  int equivalent_n = 0;
};

struct RelativeCost {
  std::string baseline;
  double relative_cost = 1.0;  // token-cost proxy
  double relative_wall = 1.0;
  std::vector<EquivalentNRow> equivalent_n;  // from relative_cost
};

struct RunReport {
  std::string name;
  std::string method;
  std::string backend;
  std::string dataset_fingerprint;
  int n = 0;
  nlohmann::json config;
  std::vector<int> ks;
  std::vector<QuestionRecord> questions;
  int questions_total = 0;
  int questions_errored = 0;
  double pass_at_1 = 0.0;             // candidate 0 accuracy
  double mean_sample_accuracy = 0.0;  // over all N samples
  std::vector<CurvePoint> curve;
  Totals totals;
  std::optional<RelativeCost> relative;

  nlohmann::json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
};

// Powers of two below n, then n itself.
std::vector<int> k_grid(int n);

// actual_n * ceil(relative_time). Throws std::invalid_argument unless
// actual_n >= 1 and relative_time >= 1.
int equivalent_n(int actual_n, double relative_time);

RunReport run(const std::vector<Problem>& problems, const RunConfig& config);
// Uses the given backend and scorer (scorer may be null) instead of the
// configured ones.
RunReport run(const std::vector<Problem>& problems, const RunConfig& config,
              CompletionBackend& backend, RewardScorer* scorer);

// Fills report.relative against a baseline; throws ComparisonError when the
// dataset or N differ.
void attach_baseline(RunReport& report, const RunReport& baseline);

RunReport load_report(const std::filesystem::path& path);

// report.json (full, sorted keys), curves.csv and plot.dat in `dir`.
void write_report(const RunReport& report, const std::filesystem::path& dir);

// The report as JSON text with wall-clock fields removed.
std::string deterministic_dump(const RunReport& report);

// --- comparison -----------------------------------------------------------------

class ComparisonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TimeMetric { kCost, kWall };

struct ComparisonRow {
  std::string name;
  std::string method;
  double relative_time = 1.0;
  double pass_at_1 = 0.0;
  std::vector<std::optional<double>> bon;  // per k
  std::vector<double> cons;
  // Differences from the baseline row.
  double pass_at_1_delta = 0.0;
  std::vector<std::optional<double>> bon_delta;
  std::vector<double> cons_delta;
};

struct Comparison {
  std::vector<int> ks;
  std::vector<ComparisonRow> rows;  // baseline first

  std::string to_text() const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// reports[0] is the baseline (relative time 1.00).
Comparison compare_runs(const std::vector<RunReport>& reports,
                        TimeMetric metric = TimeMetric::kCost);

}  // namespace idsample
