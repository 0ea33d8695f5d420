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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "idsample/harness.h"

namespace idsample {

std::vector<int> k_grid(int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  std::vector<int> ks;
  for (int k = 1; k < n; k *= 2) ks.push_back(k);
  ks.push_back(n);
  return ks;
}

int equivalent_n(int actual_n, double relative_time) {
  if (actual_n < 1) throw std::invalid_argument("actual_n must be >= 1");
  if (!(relative_time >= 1.0) || !std::isfinite(relative_time)) {
    throw std::invalid_argument("relative_time must be finite and >= 1");
  }
  return actual_n * static_cast<int>(std::ceil(relative_time));
}

namespace {

struct SampleOutcome {
  SampleRecord record;
  Candidate candidate;
  bool failed = false;  // backend or scorer failure
};

void fill_from_trajectory(SampleRecord& r, const Trajectory& t,
                          double prefill_cost_per_token) {
  r.rounds = static_cast<int>(t.rounds.size());
  r.trigger_count = t.trigger_count;
  r.allocated = t.ledger.allocated();
  r.generated = t.ledger.generated();
  r.snap_tokens = t.ledger.snap_tokens();
  r.prompt_tokens = t.ledger.prompt_tokens();
  r.trigger_tokens = t.ledger.trigger_tokens();
  r.calls = t.ledger.calls();
  r.cost_units = t.ledger.cost_units(prefill_cost_per_token);
  r.latency_s = t.ledger.wall_time_s();
}

SampleOutcome run_sample(const Problem& problem, const AnswerKey& gold, int index,
                         const RunConfig& config, CompletionBackend& backend,
                         RewardScorer* scorer) {
  SampleOutcome out;
  SampleRecord& r = out.record;
  const std::string prompt = render_prompt(config, problem);
  SamplingParams sampling;
  sampling.temperature = config.temperature;
  sampling.top_p = config.top_p;
  sampling.stop = config.stop;
  sampling.seed = sample_seed(config.seed, problem.id, index);

  Trajectory t;
  try {
    t = config.method == Method::kVanilla
            ? sample_once(prompt, config.schedule.max_total(), backend, sampling)
            : id_sample(prompt, config.schedule, config.trigger, config.boundary, backend,
                        sampling);
  } catch (const TrajectoryError& e) {
    fill_from_trajectory(r, e.partial(), config.prefill_cost_per_token);
    r.status = "error";
    r.error = e.what();
    out.failed = true;
    return out;
  }
  fill_from_trajectory(r, t, config.prefill_cost_per_token);
  r.status = std::string(to_string(t.status));

  out.candidate = make_candidate(t.generated_text());
  out.candidate.correct = equivalent(out.candidate.key, gold);
  r.response = out.candidate.response;
  r.answer = out.candidate.raw.text;
  r.canonical = out.candidate.key.kind() == AnswerKey::Kind::kMissing
                    ? ""
                    : out.candidate.key.display();
  r.correct = *out.candidate.correct;

  if (scorer != nullptr) {
    try {
      out.candidate.score = scorer->score({problem.question, r.response, r.correct});
      r.score = out.candidate.score;
    } catch (const BackendError& e) {
      r.error = std::string("scoring failed: ") + e.what();
      out.failed = true;
    }
  }
  return out;
}

double mean(double sum, int count) { return count == 0 ? 0.0 : sum / count; }

}  // namespace

RunReport run(const std::vector<Problem>& problems, const RunConfig& config,
              CompletionBackend& backend, RewardScorer* scorer) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = static_cast<std::size_t>(config.n);
  const std::size_t tasks = problems.size() * n;

  std::vector<AnswerKey> gold;
  gold.reserve(problems.size());
  for (const auto& p : problems) gold.push_back(AnswerKey::from_text(p.gold_answer));

  // Each task is one trajectory; results land in a slot fixed by the task
  // index, so the thread that ran it never matters.
  std::vector<SampleOutcome> outcomes(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      try {
        outcomes[t] = run_sample(problems[t / n], gold[t / n], static_cast<int>(t % n),
                                 config, backend, scorer);
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        next = tasks;
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), tasks);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  RunReport report;
  report.name = config.name.empty() ? std::string(to_string(config.method)) : config.name;
  report.method = std::string(to_string(config.method));
  report.backend = backend.name();
  report.dataset_fingerprint = dataset_fingerprint(problems);
  report.n = config.n;
  report.config = config.to_json();
  report.config.erase("parallelism");
  report.config.erase("baseline_report");
  report.ks = k_grid(config.n);
  report.questions_total = static_cast<int>(problems.size());

  std::vector<double> bon_sum(report.ks.size(), 0.0);
  std::vector<double> cons_sum(report.ks.size(), 0.0);
  double pass_sum = 0.0;
  double sample_sum = 0.0;
  int scored_questions = 0;

  for (std::size_t q = 0; q < problems.size(); ++q) {
    QuestionRecord qr;
    qr.id = problems[q].id;
    qr.gold_answer = problems[q].gold_answer;
    CandidateSet set;
    set.question_id = problems[q].id;
    set.question = problems[q].question;
    for (std::size_t i = 0; i < n; ++i) {
      SampleOutcome& o = outcomes[q * n + i];
      if (o.failed && !qr.errored) {
        qr.errored = true;
        qr.error = "sample " + std::to_string(i) + ": " + o.record.error;
      }
      set.candidates.push_back(std::move(o.candidate));
      qr.samples.push_back(std::move(o.record));
    }
    for (const auto& s : qr.samples) {
      report.totals.allocated += s.allocated;
      report.totals.generated += s.generated;
      report.totals.snap_tokens += s.snap_tokens;
      report.totals.prompt_tokens += s.prompt_tokens;
      report.totals.trigger_tokens += s.trigger_tokens;
      report.totals.calls += s.calls;
      report.totals.cost_units += s.cost_units;
    }
    if (qr.errored) {
      ++report.questions_errored;
      report.questions.push_back(std::move(qr));
      continue;
    }

    ++scored_questions;
    pass_sum += qr.samples[0].correct ? 1.0 : 0.0;
    int right = 0;
    for (const auto& s : qr.samples) right += s.correct ? 1 : 0;
    sample_sum += static_cast<double>(right) / static_cast<double>(n);
    for (std::size_t g = 0; g < report.ks.size(); ++g) {
      const auto k = static_cast<std::size_t>(report.ks[g]);
      const VoteTally tally = majority_vote(set, k);
      const int cons = set.candidates[tally.representative()].correct.value_or(false);
      qr.cons_correct.push_back(cons);
      cons_sum[g] += cons;
      if (scorer != nullptr) {
        const int bon = set.candidates[best_of_n(set, k)].correct.value_or(false);
        qr.bon_correct.push_back(bon);
        bon_sum[g] += bon;
      }
    }
    report.questions.push_back(std::move(qr));
  }

  report.pass_at_1 = mean(pass_sum, scored_questions);
  report.mean_sample_accuracy = mean(sample_sum, scored_questions);
  for (std::size_t g = 0; g < report.ks.size(); ++g) {
    CurvePoint point;
    point.k = report.ks[g];
    point.cons = mean(cons_sum[g], scored_questions);
    if (scorer != nullptr) point.bon = mean(bon_sum[g], scored_questions);
    report.curve.push_back(point);
  }
  report.totals.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (config.baseline_report) attach_baseline(report, load_report(*config.baseline_report));
  return report;
}

RunReport run(const std::vector<Problem>& problems, const RunConfig& config) {
  config.validate();
  auto backend = make_backend(config, problems);
  auto scorer = make_scorer(config);
  return run(problems, config, *backend, scorer.get());
}

void attach_baseline(RunReport& report, const RunReport& baseline) {
  if (report.dataset_fingerprint != baseline.dataset_fingerprint) {
    throw ComparisonError("baseline '" + baseline.name + "' used a different dataset");
  }
  if (report.n != baseline.n) {
    throw ComparisonError("baseline '" + baseline.name + "' used N=" +
                          std::to_string(baseline.n) + ", this run N=" +
                          std::to_string(report.n));
  }
  auto ratio = [](double a, double b) {
    if (b > 0) return a / b;
    return a > 0 ? std::numeric_limits<double>::infinity() : 1.0;
  };
  RelativeCost rel;
  rel.baseline = baseline.name;
  rel.relative_cost = ratio(report.totals.cost_units, baseline.totals.cost_units);
  rel.relative_wall = ratio(report.totals.wall_time_s, baseline.totals.wall_time_s);
  if (std::isfinite(rel.relative_cost)) {
    // A run cheaper than its baseline still costs at least one baseline sample.
    const double factor = std::max(1.0, rel.relative_cost);
    for (int k : report.ks) rel.equivalent_n.push_back({k, equivalent_n(k, factor)});
  }
  report.relative = std::move(rel);
}

}  // namespace idsample
