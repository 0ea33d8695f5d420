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

#include "idsample/aggregation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace idsample {

Candidate make_candidate(std::string response) {
  Candidate c;
  c.raw = extract_final_answer(response);
  c.key = AnswerKey::from_raw(c.raw);
  c.response = std::move(response);
  return c;
}

namespace {

void check_k(const CandidateSet& set, std::size_t k) {
  if (k < 1 || k > set.size()) {
    throw std::invalid_argument("k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(set.size()) + "]");
  }
}

}  // namespace

std::size_t best_of_n(const CandidateSet& set, std::size_t k) {
  check_k(set, k);
  std::size_t best = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& score = set.candidates[i].score;
    if (!score) {
      throw ScoringRequired("candidate " + std::to_string(i) + " of question '" +
                            set.question_id + "' has no score");
    }
    if (*score > *set.candidates[best].score) best = i;
  }
  return best;
}

DisjointSet::DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSet::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) x = std::exchange(parent_[x], root);
  return root;
}

bool DisjointSet::unite(std::size_t x, std::size_t y) {
  x = find(x);
  y = find(y);
  if (x == y) return false;
  if (rank_[x] < rank_[y]) std::swap(x, y);
  parent_[y] = x;
  if (rank_[x] == rank_[y]) ++rank_[x];
  return true;
}

Partition group_equivalent(std::size_t n, const EquivalencePredicate& eq) {
  DisjointSet sets(n);
  Partition out;
  // Lowest member of each live class; items are visited in order, so the
  // first item of a class is its representative.
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> matched;
    for (std::size_t rep : reps) {
      ++out.comparisons;
      if (eq(rep, i)) matched.push_back(rep);
    }
    if (matched.empty()) {
      reps.push_back(i);
      continue;
    }
    for (std::size_t rep : matched) sets.unite(rep, i);
    // Merged classes keep only their lowest representative.
    reps.erase(std::remove_if(reps.begin(), reps.end(),
                              [&](std::size_t r) {
                                return r != matched.front() &&
                                       std::find(matched.begin(), matched.end(), r) !=
                                           matched.end();
                              }),
               reps.end());
  }

  std::vector<std::vector<std::size_t>> by_root(n);
  for (std::size_t i = 0; i < n; ++i) by_root[sets.find(i)].push_back(i);
  for (auto& members : by_root) {
    if (!members.empty()) out.classes.push_back(std::move(members));
  }
  std::sort(out.classes.begin(), out.classes.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

Partition group_equivalent(const CandidateSet& set, std::size_t k,
                           const EquivalenceOptions& options) {
  check_k(set, k);
  return group_equivalent(k, [&](std::size_t a, std::size_t b) {
    return equivalent(set.candidates[a].key, set.candidates[b].key, options);
  });
}

VoteTally tally_votes(Partition partition,
                      const std::optional<std::vector<double>>& weights) {
  VoteTally tally;
  tally.comparisons = partition.comparisons;
  tally.classes = std::move(partition.classes);
  for (const auto& members : tally.classes) {
    double w = 0.0;
    for (std::size_t i : members) w += weights ? weights->at(i) : 1.0;
    tally.weights.push_back(w);
  }
  // Classes are ordered by lowest member, so strict > keeps the tie-break.
  for (std::size_t c = 1; c < tally.weights.size(); ++c) {
    if (tally.weights[c] > tally.weights[tally.winner]) tally.winner = c;
  }
  return tally;
}

VoteTally majority_vote(const CandidateSet& set, std::size_t k,
                        const std::optional<std::vector<double>>& weights,
                        const EquivalenceOptions& options) {
  check_k(set, k);
  if (weights) {
    if (weights->size() < k) throw std::invalid_argument("fewer weights than candidates");
    for (std::size_t i = 0; i < k; ++i) {
      const double w = (*weights)[i];
      if (!std::isfinite(w) || w < 0) {
        throw std::invalid_argument("vote weights must be finite and nonnegative");
      }
    }
  }
  return tally_votes(group_equivalent(set, k, options), weights);
}

}  // namespace idsample
