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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "idsample/checker.h"
#include "idsample/harness.h"

namespace {

using idsample::RunConfig;

struct RunOptions {
  std::string config;
  std::string dataset;
  std::string out;
  std::optional<std::string> method;
  std::optional<int> n;
  std::optional<long long> initial_budget;
  std::optional<double> gamma;
  std::optional<long long> max_total_tokens;
  std::optional<int> parallelism;
  std::optional<unsigned long long> seed;
  std::optional<std::string> name;
  std::optional<std::string> baseline;
};

int do_run(const RunOptions& o) {
  std::ifstream in(o.config);
  if (!in) throw std::runtime_error("cannot open config " + o.config);
  nlohmann::json j = nlohmann::json::parse(in);
  if (o.method) j["method"] = *o.method;
  if (o.n) j["n"] = *o.n;
  if (o.initial_budget) j["initial_budget"] = *o.initial_budget;
  if (o.gamma) j["gamma"] = *o.gamma;
  if (o.max_total_tokens) j["max_total_tokens"] = *o.max_total_tokens;
  if (o.parallelism) j["parallelism"] = *o.parallelism;
  if (o.seed) j["seed"] = *o.seed;
  if (o.name) j["name"] = *o.name;
  RunConfig config =
      RunConfig::from_json(j, std::filesystem::path(o.config).parent_path());
  if (o.baseline) config.baseline_report = *o.baseline;

  const auto problems = idsample::load_dataset(o.dataset);
  const idsample::RunReport report = idsample::run(problems, config);
  idsample::write_report(report, o.out);

  std::printf("%s: %d questions (%d errored), N=%d, pass@1 %.4f\n", report.name.c_str(),
              report.questions_total, report.questions_errored, report.n,
              report.pass_at_1);
  for (const auto& p : report.curve) {
    if (p.bon) {
      std::printf("  k=%-3d bon %.4f  cons %.4f\n", p.k, *p.bon, p.cons);
    } else {
      std::printf("  k=%-3d cons %.4f\n", p.k, p.cons);
    }
  }
  std::printf("  generated %lld tokens, cost %.1f units, %.2f s\n",
              static_cast<long long>(report.totals.generated), report.totals.cost_units,
              report.totals.wall_time_s);
  if (report.relative) {
    std::printf("  relative cost vs %s: %.2f\n", report.relative->baseline.c_str(),
                report.relative->relative_cost);
  }
  std::printf("  wrote %s\n", o.out.c_str());
  return 0;
}

int do_compare(const std::string& baseline, const std::vector<std::string>& candidates,
               const std::string& metric, const std::string& out) {
  std::vector<idsample::RunReport> reports;
  reports.push_back(idsample::load_report(baseline));
  for (const auto& c : candidates) reports.push_back(idsample::load_report(c));
  const auto table = idsample::compare_runs(
      reports, metric == "wall" ? idsample::TimeMetric::kWall : idsample::TimeMetric::kCost);
  std::cout << table.to_text();
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "comparison.csv") << table.to_csv();
    std::ofstream(std::filesystem::path(out) / "comparison.json")
        << table.to_json().dump(2) << "\n";
  }
  return 0;
}

int do_check_equivalent(const std::string& a, const std::string& b) {
  const auto ka = idsample::AnswerKey::from_text(a);
  const auto kb = idsample::AnswerKey::from_text(b);
  const bool same = idsample::equivalent(ka, kb);
  std::printf("%s\n  a: %s\n  b: %s\n", same ? "equivalent" : "not equivalent",
              ka.display().c_str(), kb.display().c_str());
  return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative deepening sampling orchestrator"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Sample a dataset and write a report");
  run_cmd->add_option("--config", run_opts.config, "JSON run config")->required();
  run_cmd->add_option("--dataset", run_opts.dataset, "JSONL dataset")->required();
  run_cmd->add_option("--out", run_opts.out, "Output directory")->required();
  run_cmd->add_option("--method", run_opts.method, "vanilla or id_sampling");
  run_cmd->add_option("--n", run_opts.n, "Samples per question");
  run_cmd->add_option("--initial-budget", run_opts.initial_budget, "First round budget");
  run_cmd->add_option("--gamma", run_opts.gamma, "Budget growth factor");
  run_cmd->add_option("--max-total-tokens", run_opts.max_total_tokens, "Token cap");
  run_cmd->add_option("--parallelism", run_opts.parallelism, "Concurrent trajectories");
  run_cmd->add_option("--seed", run_opts.seed, "Run seed");
  run_cmd->add_option("--name", run_opts.name, "Report name");
  run_cmd->add_option("--baseline", run_opts.baseline, "Baseline report for relative cost");

  std::string baseline;
  std::vector<std::string> candidates;
  std::string metric = "cost";
  std::string compare_out;
  auto* compare_cmd = app.add_subcommand("compare", "Compare reports against a baseline");
  compare_cmd->add_option("--baseline", baseline, "Baseline report")->required();
  compare_cmd->add_option("--candidate", candidates, "Candidate reports")->required();
  compare_cmd->add_option("--metric", metric, "Time column: cost or wall")
      ->check(CLI::IsMember({"cost", "wall"}));
  compare_cmd->add_option("--out", compare_out, "Write comparison.csv/json here");

  auto* check_cmd = app.add_subcommand("check", "Answer checker utilities");
  check_cmd->require_subcommand(1);
  std::string lhs, rhs;
  auto* eq_cmd = check_cmd->add_subcommand("equivalent", "Exit 0 iff two answers match");
  eq_cmd->add_option("a", lhs)->required();
  eq_cmd->add_option("b", rhs)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return do_run(run_opts);
    if (*compare_cmd) return do_compare(baseline, candidates, metric, compare_out);
    if (*eq_cmd) return do_check_equivalent(lhs, rhs);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
