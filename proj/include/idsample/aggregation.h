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

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "idsample/backend.h"
#include "idsample/checker.h"

namespace idsample {

struct Candidate {
  std::string response;          // generated text, without the prompt
  RawAnswer raw;                 // extracted final answer
  AnswerKey key;                 // parsed form used for voting
  std::optional<bool> correct;   // against the gold answer, when known
  std::optional<double> score;   // reward score; absent until scored
  std::string score_error;       // last scorer failure, if unscored
};

// Candidates in generation order.
struct CandidateSet {
  std::string question_id;
  std::string question;
  std::vector<Candidate> candidates;

  std::size_t size() const { return candidates.size(); }
};

// Builds a candidate from a response: extracts and parses its answer.
Candidate make_candidate(std::string response);

class ScoringRequired : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Index of the best-scored candidate among the first k; ties go to the
// lowest index. Throws std::invalid_argument unless 1 <= k <= size, and
// ScoringRequired if one of the first k has no score.
std::size_t best_of_n(const CandidateSet& set, std::size_t k);

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n);
  std::size_t find(std::size_t x);
  // Returns false when x and y were already together.
  bool unite(std::size_t x, std::size_t y);
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_;
};

struct Partition {
  // Each class sorted ascending; classes ordered by their lowest member.
  std::vector<std::vector<std::size_t>> classes;
  std::size_t comparisons = 0;  // predicate evaluations
};

using EquivalencePredicate = std::function<bool(std::size_t, std::size_t)>;

// Groups 0..n-1 by comparing each item with the representative (lowest
// member) of every class formed so far; an item matching several classes
// merges them.
Partition group_equivalent(std::size_t n, const EquivalencePredicate& eq);

// Groups the first k candidates of `set` by answer equivalence.
Partition group_equivalent(const CandidateSet& set, std::size_t k,
                           const EquivalenceOptions& options = {});

struct VoteTally {
  std::vector<std::vector<std::size_t>> classes;
  std::vector<double> weights;  // per class
  std::size_t winner = 0;       // index into classes
  std::size_t comparisons = 0;

  // Lowest candidate index of the winning class.
  std::size_t representative() const { return classes.at(winner).front(); }
};

// Class weight is its size, or the sum of member weights. The heaviest class
// wins; ties go to the class holding the lowest candidate index.
VoteTally tally_votes(Partition partition,
                      const std::optional<std::vector<double>>& weights = std::nullopt);

// Throws std::invalid_argument unless 1 <= k <= size and weights (when
// given) cover the first k candidates and are finite and nonnegative.
VoteTally majority_vote(const CandidateSet& set, std::size_t k,
                        const std::optional<std::vector<double>>& weights = std::nullopt,
                        const EquivalenceOptions& options = {});

// --- reward scoring -----------------------------------------------------------

struct ScoreRequest {
  std::string question;
  std::string response;
  std::optional<bool> correct;  // only the stub scorer looks at this
};

class RewardScorer {
 public:
  virtual ~RewardScorer() = default;
  // Returns a finite score; throws BackendError on failure.
  virtual double score(const ScoreRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct StubScorerConfig {
  std::uint64_t seed = 0;
  double correct_score = 1.0;
  double incorrect_score = 0.0;
  double noise = 0.0;                  // standard deviation of added noise
  double inversion_probability = 0.0;  // chance of swapping the two scores

  void validate() const;
  static StubScorerConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// A deterministic function of (seed, question, response, correctness). With
// unknown correctness the base score is the midpoint of the two levels.
class StubScorer : public RewardScorer {
 public:
  explicit StubScorer(StubScorerConfig config);
  double score(const ScoreRequest& request) override;
  std::string name() const override { return "stub"; }

 private:
  StubScorerConfig config_;
};

struct HttpScorerConfig {
  std::string base_url = "http://127.0.0.1:8001";
  std::string api_key;
  double timeout_s = 120.0;
  RetryPolicy retry;
};

// POST {base_url}/score with {"question", "response"}; reads {"score"}.
class HttpScorer : public RewardScorer {
 public:
  explicit HttpScorer(HttpScorerConfig config);
  double score(const ScoreRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  HttpScorerConfig config_;
};

// Scores every candidate. A candidate whose scorer call fails keeps no score
// and records the error; returns the number left unscored.
std::size_t score_candidates(CandidateSet& set, RewardScorer& scorer);

}  // namespace idsample
