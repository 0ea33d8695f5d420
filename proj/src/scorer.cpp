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

#include <cmath>
#include <numbers>

#include "http_post.h"
#include "idsample/aggregation.h"
#include "idsample/hashing.h"

namespace idsample {

void StubScorerConfig::validate() const {
  if (!std::isfinite(correct_score) || !std::isfinite(incorrect_score)) {
    throw std::invalid_argument("stub scores must be finite");
  }
  if (!(noise >= 0) || !std::isfinite(noise)) {
    throw std::invalid_argument("stub noise must be finite and >= 0");
  }
  if (!(inversion_probability >= 0 && inversion_probability <= 1)) {
    throw std::invalid_argument("inversion probability must lie in [0, 1]");
  }
}

StubScorerConfig StubScorerConfig::from_json(const nlohmann::json& j) {
  StubScorerConfig c;
  c.seed = j.value("seed", c.seed);
  c.correct_score = j.value("correct_score", c.correct_score);
  c.incorrect_score = j.value("incorrect_score", c.incorrect_score);
  c.noise = j.value("noise", c.noise);
  c.inversion_probability = j.value("inversion_probability", c.inversion_probability);
  c.validate();
  return c;
}

nlohmann::json StubScorerConfig::to_json() const {
  return {{"kind", "stub"},
          {"seed", seed},
          {"correct_score", correct_score},
          {"incorrect_score", incorrect_score},
          {"noise", noise},
          {"inversion_probability", inversion_probability}};
}

StubScorer::StubScorer(StubScorerConfig config) : config_(config) { config_.validate(); }

double StubScorer::score(const ScoreRequest& request) {
  const std::uint64_t key =
      mix_seed({config_.seed, fnv1a64(request.question), fnv1a64(request.response)});
  double base = 0.5 * (config_.correct_score + config_.incorrect_score);
  if (request.correct) {
    bool looks_correct = *request.correct;
    if (unit_interval(mix_seed({key, 1})) < config_.inversion_probability) {
      looks_correct = !looks_correct;
    }
    base = looks_correct ? config_.correct_score : config_.incorrect_score;
  }
  if (config_.noise > 0) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - unit_interval(mix_seed({key, 2}));
    const double u2 = unit_interval(mix_seed({key, 3}));
    base += config_.noise * std::sqrt(-2.0 * std::log(u1)) *
            std::cos(2.0 * std::numbers::pi * u2);
  }
  return base;
}

HttpScorer::HttpScorer(HttpScorerConfig config) : config_(std::move(config)) {}

double HttpScorer::score(const ScoreRequest& request) {
  const nlohmann::json body = {{"question", request.question},
                               {"response", request.response}};
  const nlohmann::json reply = with_retries(config_.retry, [&] {
    return detail::post_json(config_.base_url, "/score", body, config_.api_key,
                             config_.timeout_s);
  });
  if (!reply.is_object() || !reply.contains("score") || !reply["score"].is_number()) {
    throw ProtocolError("score response has no numeric 'score'");
  }
  const double s = reply["score"].get<double>();
  if (!std::isfinite(s)) throw ProtocolError("score is not finite");
  return s;
}

std::size_t score_candidates(CandidateSet& set, RewardScorer& scorer) {
  std::size_t unscored = 0;
  for (auto& c : set.candidates) {
    try {
      c.score = scorer.score({set.question, c.response, c.correct});
      c.score_error.clear();
    } catch (const BackendError& e) {
      c.score.reset();
      c.score_error = e.what();
      ++unscored;
    }
  }
  return unscored;
}

}  // namespace idsample
