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
#include <array>
#include <cctype>
#include <cmath>

#include "idsample/backend.h"
#include "idsample/checker.h"
#include "idsample/hashing.h"

namespace idsample {

namespace {

constexpr std::array<std::string_view, 16> kLexicon = {
    "consider", "the",   "value", "so",    "we",     "get",  "then", "compute",
    "check",    "hence", "both",  "sides", "factor", "term", "sum",  "gives"};

// Salts separating the independent draws of one attempt.
enum Salt : std::uint64_t {
  kSaltSolve = 1,
  kSaltTransition = 2,
  kSaltLength = 3,
  kSaltAnswer = 4,
  kSaltWords = 5,
};

bool in_unit_interval(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

Tokens LengthDistribution::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::kFixed:
      return fixed;
    case Kind::kUniform:
      return std::uniform_int_distribution<Tokens>(min, max)(rng);
    case Kind::kLogNormal: {
      const double v = std::lognormal_distribution<double>(mu, sigma)(rng);
      return std::clamp<Tokens>(static_cast<Tokens>(std::llround(v)), min, max);
    }
  }
  return fixed;
}

void LengthDistribution::validate() const {
  if (kind == Kind::kFixed && fixed < 1) {
    throw std::invalid_argument("fixed length must be >= 1");
  }
  if (kind != Kind::kFixed && (min < 1 || max < min)) {
    throw std::invalid_argument("length distribution needs 1 <= min <= max");
  }
  if (kind == Kind::kLogNormal && !(sigma > 0)) {
    throw std::invalid_argument("log-normal sigma must be > 0");
  }
}

LengthDistribution LengthDistribution::from_json(const nlohmann::json& j) {
  LengthDistribution d;
  const std::string kind = j.value("kind", "uniform");
  if (kind == "fixed") {
    d.kind = Kind::kFixed;
  } else if (kind == "uniform") {
    d.kind = Kind::kUniform;
  } else if (kind == "lognormal") {
    d.kind = Kind::kLogNormal;
  } else {
    throw std::invalid_argument("unknown length distribution '" + kind + "'");
  }
  d.fixed = j.value("fixed", d.fixed);
  d.min = j.value("min", d.min);
  d.max = j.value("max", d.max);
  d.mu = j.value("mu", d.mu);
  d.sigma = j.value("sigma", d.sigma);
  d.validate();
  return d;
}

nlohmann::json LengthDistribution::to_json() const {
  switch (kind) {
    case Kind::kFixed:
      return {{"kind", "fixed"}, {"fixed", fixed}};
    case Kind::kUniform:
      return {{"kind", "uniform"}, {"min", min}, {"max", max}};
    case Kind::kLogNormal:
      return {{"kind", "lognormal"}, {"mu", mu}, {"sigma", sigma},
              {"min", min}, {"max", max}};
  }
  return {};
}

void StochasticModelParams::validate() const {
  if (!in_unit_interval(p_solve) || !in_unit_interval(p_correct_on_trigger) ||
      !in_unit_interval(p_derail_on_trigger)) {
    throw std::invalid_argument("simulator probabilities must lie in [0, 1]");
  }
  if (answer_vocabulary.empty()) {
    throw std::invalid_argument("answer vocabulary must not be empty");
  }
  if (step_words < 1) throw std::invalid_argument("step_words must be >= 1");
  if (trigger_text.empty()) throw std::invalid_argument("trigger text is empty");
  length.validate();
}

StochasticModelParams StochasticModelParams::from_json(const nlohmann::json& j) {
  StochasticModelParams p;
  p.p_solve = j.value("p_solve", p.p_solve);
  p.p_correct_on_trigger = j.value("p_correct_on_trigger", p.p_correct_on_trigger);
  p.p_derail_on_trigger = j.value("p_derail_on_trigger", p.p_derail_on_trigger);
  if (j.contains("length")) p.length = LengthDistribution::from_json(j.at("length"));
  if (j.contains("answer_vocabulary")) {
    p.answer_vocabulary = j.at("answer_vocabulary").get<std::vector<std::string>>();
  }
  p.step_words = j.value("step_words", p.step_words);
  p.trigger_text = j.value("trigger_text", p.trigger_text);
  p.validate();
  return p;
}

nlohmann::json StochasticModelParams::to_json() const {
  return {{"p_solve", p_solve},
          {"p_correct_on_trigger", p_correct_on_trigger},
          {"p_derail_on_trigger", p_derail_on_trigger},
          {"length", length.to_json()},
          {"answer_vocabulary", answer_vocabulary},
          {"step_words", step_words},
          {"trigger_text", trigger_text}};
}

StochasticBackend::StochasticBackend(StochasticModelParams params,
                                     std::uint64_t seed)
    : params_(std::move(params)), seed_(seed) {
  params_.validate();
}

void StochasticBackend::register_problem(const std::string& prompt,
                                         const std::string& gold_answer) {
  Problem problem;
  problem.gold = gold_answer;
  const AnswerKey gold_key = AnswerKey::from_text(gold_answer);
  for (const auto& candidate : params_.answer_vocabulary) {
    if (!equivalent(AnswerKey::from_text(candidate), gold_key) &&
        normalize_answer_text(candidate) != normalize_answer_text(gold_answer)) {
      problem.wrong_answers.push_back(candidate);
    }
  }
  if (problem.wrong_answers.empty()) problem.wrong_answers.push_back("none");
  problems_[prompt] = std::move(problem);
  if (!std::binary_search(prompt_lengths_.begin(), prompt_lengths_.end(),
                          prompt.size())) {
    prompt_lengths_.insert(std::upper_bound(prompt_lengths_.begin(),
                                            prompt_lengths_.end(), prompt.size()),
                           prompt.size());
  }
}

const std::pair<const std::string, StochasticBackend::Problem>*
StochasticBackend::find_problem(std::string_view prompt) const {
  // Longest registered prompt that prefixes this one.
  for (auto it = prompt_lengths_.rbegin(); it != prompt_lengths_.rend(); ++it) {
    if (*it > prompt.size()) continue;
    auto found = problems_.find(std::string(prompt.substr(0, *it)));
    if (found != problems_.end()) return &*found;
  }
  return nullptr;
}

StochasticBackend::Attempt StochasticBackend::attempt(
    const std::string& problem_prompt, std::uint64_t request_seed,
    int index) const {
  const auto found = problems_.find(problem_prompt);
  if (found == problems_.end()) {
    throw ProtocolError("prompt was not registered with the simulator");
  }
  const Problem& problem = found->second;
  const std::uint64_t stream = mix_seed({seed_, request_seed, fnv1a64(problem_prompt)});
  auto draw = [&](int a, std::uint64_t salt) {
    return unit_interval(mix_seed({stream, static_cast<std::uint64_t>(a), salt}));
  };

  bool correct = draw(0, kSaltSolve) < params_.p_solve;
  for (int a = 1; a <= index; ++a) {
    const double u = draw(a, kSaltTransition);
    correct = correct ? !(u < params_.p_derail_on_trigger)
                      : (u < params_.p_correct_on_trigger);
  }

  Attempt out;
  out.correct = correct;
  std::mt19937_64 rng(mix_seed({stream, static_cast<std::uint64_t>(index), kSaltLength}));
  out.length = params_.length.sample(rng);
  if (correct) {
    out.answer = problem.gold;
  } else {
    const double u = draw(index, kSaltAnswer);
    const auto pick = static_cast<std::size_t>(u * problem.wrong_answers.size());
    out.answer = problem.wrong_answers[std::min(pick, problem.wrong_answers.size() - 1)];
  }

  const std::string closing = "So the final answer is \\boxed{" + out.answer + "}.";
  const Tokens body = std::max<Tokens>(0, out.length - count_words(closing));
  std::string text;
  std::uint64_t word_key = mix_seed({stream, static_cast<std::uint64_t>(index), kSaltWords});
  for (Tokens w = 0; w < body; ++w) {
    if (w > 0) text += (w % params_.step_words == 0) ? "\n\n" : " ";
    word_key = splitmix64(word_key);
    text += kLexicon[word_key % kLexicon.size()];
  }
  if (!text.empty()) text += "\n\n";
  text += closing;
  out.length = count_words(text);
  out.text = std::move(text);
  return out;
}

std::vector<CompletionResult> StochasticBackend::complete(
    const CompletionRequest& request) {
  request.validate();
  const auto* problem = find_problem(request.prompt);
  if (problem == nullptr) {
    throw ProtocolError("simulator has no problem registered for this prompt");
  }
  std::string_view rest = std::string_view(request.prompt).substr(problem->first.size());

  // Each trigger in the generated part starts a new attempt.
  int index = 0;
  std::size_t attempt_start = 0;
  for (std::size_t at = rest.find(params_.trigger_text); at != std::string_view::npos;
       at = rest.find(params_.trigger_text, at + 1)) {
    ++index;
    attempt_start = at + params_.trigger_text.size();
  }
  std::string_view tail = rest.substr(attempt_start);
  while (!tail.empty() && std::isspace(static_cast<unsigned char>(tail.front()))) {
    tail.remove_prefix(1);
  }

  std::vector<CompletionResult> results;
  for (int i = 0; i < request.n; ++i) {
    const std::uint64_t request_seed =
        request.seed.value_or(0) + static_cast<std::uint64_t>(i);
    const Attempt current = attempt(problem->first, request_seed, index);
    if (current.text.compare(0, tail.size(), tail) != 0) {
      throw ProtocolError("prompt continues text this simulator did not produce");
    }
    auto cut = cut_continuation(std::string_view(current.text).substr(tail.size()),
                                request, /*natural_end=*/true);
    results.push_back(std::move(*cut));
  }
  record(results);
  return results;
}

}  // namespace idsample
