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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "idsample/scheduler.h"
#include "json.hpp"

namespace idsample {

enum class FinishReason { kStop, kLength };

std::string_view to_string(FinishReason reason);
FinishReason finish_reason_from_string(std::string_view text);

struct CompletionRequest {
  std::string prompt;
  Tokens max_tokens = 16;
  std::vector<std::string> stop;
  double temperature = 1.0;
  double top_p = 1.0;
  std::optional<std::uint64_t> seed;
  int n = 1;

  // Throws std::invalid_argument unless max_tokens >= 1 and n >= 1.
  void validate() const;
};

struct CompletionResult {
  std::string text;
  FinishReason finish_reason = FinishReason::kStop;
  Tokens tokens_used = 0;
  double latency_s = 0.0;
  // Which stop sequence ended generation; empty for a natural end of
  // sequence or when the server does not say.
  std::optional<std::string> matched_stop;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Network failure, timeout or 5xx that survived every retry.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

// The server (or simulator) answered with something that violates the
// completion contract.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

// A scripted backend was asked for a prompt its script does not cover.
class ScriptGapError : public BackendError {
 public:
  using BackendError::BackendError;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  // Returns request.n results. Implementations are safe to call from many
  // threads at once.
  virtual std::vector<CompletionResult> complete(
      const CompletionRequest& request) = 0;

  virtual std::string name() const = 0;

  // Tokens the backend would charge for `text`; whitespace words by default.
  virtual Tokens count_tokens(std::string_view text) const;

  // Totals over every result this backend has produced.
  Tokens tokens_generated() const { return tokens_generated_.load(); }
  std::int64_t results_returned() const { return results_returned_.load(); }

 protected:
  void record(const std::vector<CompletionResult>& results);

 private:
  std::atomic<Tokens> tokens_generated_{0};
  std::atomic<std::int64_t> results_returned_{0};
};

// Number of maximal non-whitespace runs; the simulators' token unit.
Tokens count_words(std::string_view text);

// Cuts a continuation the way a completion server would: at the earliest
// stop sequence (earlier list entries win ties), then at max_tokens words.
// When neither applies, `natural_end` decides between stop and length.
// Returns nullopt when the text ran out before max_tokens without a natural
// end, i.e. the continuation is too short to satisfy the request.
std::optional<CompletionResult> cut_continuation(std::string_view continuation,
                                                 const CompletionRequest& request,
                                                 bool natural_end);

struct RetryPolicy {
  int max_attempts = 3;
  double backoff_base_s = 1.0;
  double backoff_multiplier = 2.0;
  double jitter = 0.25;  // +- fraction of each delay
};

// Runs `attempt` until it succeeds or max_attempts is reached. Only
// TransportError is retried; the last one is rethrown.
template <typename F>
auto with_retries(const RetryPolicy& policy, F&& attempt) -> decltype(attempt()) {
  thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
  double delay = policy.backoff_base_s;
  for (int i = 1;; ++i) {
    try {
      return attempt();
    } catch (const TransportError&) {
      if (i >= policy.max_attempts) throw;
    }
    std::uniform_real_distribution<double> jitter(1.0 - policy.jitter,
                                                  1.0 + policy.jitter);
    const double wait = std::max(0.0, delay * jitter(jitter_rng));
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    delay *= policy.backoff_multiplier;
  }
}

// --- scripted -------------------------------------------------------------

struct ScriptMatcher {
  enum class Kind { kAny, kEquals, kContains, kEndsWith };
  Kind kind = Kind::kAny;
  std::string pattern;

  bool matches(std::string_view prompt) const;
};

struct ScriptEntry {
  ScriptMatcher matcher;
  std::string text;
  FinishReason finish = FinishReason::kStop;
  // Repeating entries are never consumed.
  bool repeat = false;
};

// Replays a fixed script. Each call takes the first unconsumed entry whose
// matcher accepts the prompt; no match raises ScriptGapError. A "length"
// entry must hold at least max_tokens words, so the result always satisfies
// tokens_used == max_tokens.
class ScriptedBackend : public CompletionBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> entries);

  // {"entries": [{"match": {"kind": "contains", "pattern": "..."},
  //               "text": "...", "finish": "stop" | "length",
  //               "repeat": false}, ...]}
  static std::vector<ScriptEntry> entries_from_json(const nlohmann::json& j);
  static std::vector<ScriptEntry> entries_from_file(
      const std::filesystem::path& path);

  std::vector<CompletionResult> complete(const CompletionRequest& request) override;
  std::string name() const override { return "scripted"; }

  // Prompts received so far, in call order.
  std::vector<std::string> prompts() const;
  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::vector<ScriptEntry> entries_;
  std::vector<bool> consumed_;
  std::vector<std::string> prompts_;
};

ScriptedBackend script_define(std::vector<ScriptEntry> entries);

// --- stochastic simulator ---------------------------------------------------

struct LengthDistribution {
  enum class Kind { kFixed, kUniform, kLogNormal };
  Kind kind = Kind::kUniform;
  Tokens fixed = 512;
  Tokens min = 128;
  Tokens max = 2048;
  double mu = 6.5;  // log-normal parameters of the token count
  double sigma = 0.6;

  Tokens sample(std::mt19937_64& rng) const;
  void validate() const;
  static LengthDistribution from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct StochasticModelParams {
  double p_solve = 0.3;
  double p_correct_on_trigger = 0.5;
  double p_derail_on_trigger = 0.0;
  LengthDistribution length;
  std::vector<std::string> answer_vocabulary = {"0", "1", "2",  "3",  "5",
                                                "7", "9", "12", "15", "24"};
  // Words per simulated reasoning step; steps are separated by "\n\n".
  Tokens step_words = 24;
  // Marks the start of a new attempt when it appears in the prompt.
  std::string trigger_text =
      "Wait! Maybe I made some mistakes! I need to rethink from scratch.";

  void validate() const;
  static StochasticModelParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Simulates a solver that works in attempts. An attempt has a hidden length
// and correctness; it writes reasoning steps and ends with
// "\boxed{answer}" followed by end-of-sequence. Each trigger found in the
// prompt starts a new attempt whose correctness follows the previous one:
// wrong -> right with p_correct_on_trigger, right -> wrong with
// p_derail_on_trigger. Output is a pure function of (seed, request seed,
// prompt), so replay and concurrency never change a byte.
class StochasticBackend : public CompletionBackend {
 public:
  StochasticBackend(StochasticModelParams params, std::uint64_t seed);

  // Registers a problem by the exact prompt the engine will send first.
  void register_problem(const std::string& prompt, const std::string& gold_answer);

  std::vector<CompletionResult> complete(const CompletionRequest& request) override;
  std::string name() const override { return "stochastic"; }

  const StochasticModelParams& params() const { return params_; }

  struct Attempt {
    bool correct = false;
    Tokens length = 0;
    std::string answer;
    std::string text;
  };
  // The full text attempt `index` would produce for a registered prompt.
  Attempt attempt(const std::string& problem_prompt, std::uint64_t request_seed,
                  int index) const;

 private:
  struct Problem {
    std::string gold;
    std::vector<std::string> wrong_answers;
  };
  const std::pair<const std::string, Problem>* find_problem(
      std::string_view prompt) const;

  StochasticModelParams params_;
  std::uint64_t seed_;
  std::unordered_map<std::string, Problem> problems_;
  std::vector<std::size_t> prompt_lengths_;  // distinct, ascending
};

// --- HTTP -----------------------------------------------------------------

struct HttpBackendConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model;
  std::string api_key;  // sent as a bearer token when non-empty
  double timeout_s = 600.0;
  int max_in_flight = 16;
  RetryPolicy retry;
};

// Client for OpenAI-compatible POST {base_url}/v1/completions.
class HttpCompletionBackend : public CompletionBackend {
 public:
  explicit HttpCompletionBackend(HttpBackendConfig config);

  std::vector<CompletionResult> complete(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

  // Request body for `request`; the prompt is passed through unchanged.
  nlohmann::json request_body(const CompletionRequest& request) const;
  // Throws ProtocolError on a malformed response.
  static std::vector<CompletionResult> parse_response(
      const nlohmann::json& body, const CompletionRequest& request);

 private:
  HttpBackendConfig config_;
  std::counting_semaphore<1 << 16> in_flight_;
};

}  // namespace idsample
