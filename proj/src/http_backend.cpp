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

#include <chrono>

#include "http_post.h"
#include "idsample/backend.h"

namespace idsample {

HttpCompletionBackend::HttpCompletionBackend(HttpBackendConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {}

nlohmann::json HttpCompletionBackend::request_body(
    const CompletionRequest& request) const {
  nlohmann::json body = {
      {"model", config_.model},
      {"prompt", request.prompt},
      {"max_tokens", request.max_tokens},
      {"temperature", request.temperature},
      {"top_p", request.top_p},
      {"n", request.n},
  };
  if (!request.stop.empty()) body["stop"] = request.stop;
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

std::vector<CompletionResult> HttpCompletionBackend::parse_response(
    const nlohmann::json& body, const CompletionRequest& request) {
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array()) {
    throw ProtocolError("completion response has no choices array");
  }
  const auto& choices = body["choices"];
  if (static_cast<int>(choices.size()) != request.n) {
    throw ProtocolError("expected " + std::to_string(request.n) + " choices, got " +
                        std::to_string(choices.size()));
  }
  std::optional<Tokens> usage_tokens;
  if (body.contains("usage") && body["usage"].is_object() &&
      body["usage"].contains("completion_tokens") && request.n == 1) {
    usage_tokens = body["usage"]["completion_tokens"].get<Tokens>();
  }

  std::vector<CompletionResult> results(choices.size());
  // Choices may arrive out of order; "index" says where each belongs.
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const auto& choice = choices[i];
    if (!choice.is_object() || !choice.contains("text") || !choice["text"].is_string()) {
      throw ProtocolError("choice without text");
    }
    const std::size_t slot = choice.value("index", i);
    if (slot >= results.size()) throw ProtocolError("choice index out of range");
    CompletionResult& r = results[slot];
    r.text = choice["text"].get<std::string>();
    const auto& reason = choice.contains("finish_reason") ? choice["finish_reason"]
                                                           : nlohmann::json();
    r.finish_reason = reason.is_string()
                          ? finish_reason_from_string(reason.get<std::string>())
                          : FinishReason::kStop;
    if (choice.contains("stop_reason")) {
      if (choice["stop_reason"].is_string()) {
        r.matched_stop = choice["stop_reason"].get<std::string>();
      }
    } else if (r.finish_reason == FinishReason::kStop && !request.stop.empty()) {
      // Server does not say which stop fired; assume the last (shortest).
      r.matched_stop = request.stop.back();
    }
    if (r.finish_reason == FinishReason::kLength) {
      r.tokens_used = request.max_tokens;
    } else if (usage_tokens) {
      r.tokens_used = *usage_tokens;
    } else {
      r.tokens_used = count_words(r.text);
    }
  }
  return results;
}

std::vector<CompletionResult> HttpCompletionBackend::complete(
    const CompletionRequest& request) {
  request.validate();
  const nlohmann::json body = request_body(request);
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1 << 16>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  const auto start = std::chrono::steady_clock::now();
  const nlohmann::json reply = with_retries(config_.retry, [&] {
    return detail::post_json(config_.base_url, "/v1/completions", body,
                             config_.api_key, config_.timeout_s);
  });
  const double latency =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto results = parse_response(reply, request);
  for (auto& r : results) r.latency_s = latency;
  record(results);
  return results;
}

}  // namespace idsample
