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

#include <cctype>
#include <fstream>

#include "idsample/backend.h"

namespace idsample {

std::string_view to_string(FinishReason reason) {
  return reason == FinishReason::kStop ? "stop" : "length";
}

FinishReason finish_reason_from_string(std::string_view text) {
  if (text == "stop" || text == "eos" || text == "end_turn") {
    return FinishReason::kStop;
  }
  if (text == "length" || text == "max_tokens") return FinishReason::kLength;
  throw ProtocolError("unknown finish reason '" + std::string(text) + "'");
}

void CompletionRequest::validate() const {
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (temperature < 0) throw std::invalid_argument("temperature must be >= 0");
}

Tokens CompletionBackend::count_tokens(std::string_view text) const {
  return count_words(text);
}

void CompletionBackend::record(const std::vector<CompletionResult>& results) {
  Tokens total = 0;
  for (const auto& r : results) total += r.tokens_used;
  tokens_generated_ += total;
  results_returned_ += static_cast<std::int64_t>(results.size());
}

Tokens count_words(std::string_view text) {
  Tokens words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

namespace {

// Byte offset just past the n-th word of text (n >= 1).
std::size_t end_of_word(std::string_view text, Tokens n) {
  Tokens words = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool space = std::isspace(static_cast<unsigned char>(text[i]));
    if (!space && !in_word) ++words;
    if (space && in_word && words == n) return i;
    in_word = !space;
  }
  return text.size();
}

}  // namespace

std::optional<CompletionResult> cut_continuation(std::string_view continuation,
                                                 const CompletionRequest& request,
                                                 bool natural_end) {
  std::size_t cut = continuation.size();
  std::optional<std::string> matched;
  for (const auto& stop : request.stop) {
    if (stop.empty()) continue;
    const std::size_t at = continuation.find(stop);
    if (at != std::string_view::npos && at < cut) {
      cut = at;
      matched = stop;
    }
  }
  const std::string_view text = continuation.substr(0, cut);
  const Tokens words = count_words(text);

  CompletionResult result;
  if (words > request.max_tokens) {
    result.text = std::string(text.substr(0, end_of_word(text, request.max_tokens)));
    result.finish_reason = FinishReason::kLength;
    result.tokens_used = request.max_tokens;
    return result;
  }
  if (matched) {
    result.text = std::string(text);
    result.finish_reason = FinishReason::kStop;
    result.tokens_used = words;
    result.matched_stop = std::move(matched);
    return result;
  }
  if (natural_end) {
    result.text = std::string(text);
    result.finish_reason = FinishReason::kStop;
    result.tokens_used = words;
    return result;
  }
  if (words == request.max_tokens) {
    result.text = std::string(text);
    result.finish_reason = FinishReason::kLength;
    result.tokens_used = words;
    return result;
  }
  return std::nullopt;
}

// --- scripted ---------------------------------------------------------------

bool ScriptMatcher::matches(std::string_view prompt) const {
  switch (kind) {
    case Kind::kAny:
      return true;
    case Kind::kEquals:
      return prompt == pattern;
    case Kind::kContains:
      return prompt.find(pattern) != std::string_view::npos;
    case Kind::kEndsWith:
      return prompt.size() >= pattern.size() &&
             prompt.substr(prompt.size() - pattern.size()) == pattern;
  }
  return false;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> entries)
    : entries_(std::move(entries)), consumed_(entries_.size(), false) {}

std::vector<ScriptEntry> ScriptedBackend::entries_from_json(const nlohmann::json& j) {
  const nlohmann::json& list = j.is_array() ? j : j.at("entries");
  std::vector<ScriptEntry> entries;
  for (const auto& item : list) {
    ScriptEntry e;
    if (item.contains("match")) {
      const auto& m = item.at("match");
      const std::string kind = m.value("kind", "any");
      if (kind == "any") {
        e.matcher.kind = ScriptMatcher::Kind::kAny;
      } else if (kind == "equals") {
        e.matcher.kind = ScriptMatcher::Kind::kEquals;
      } else if (kind == "contains") {
        e.matcher.kind = ScriptMatcher::Kind::kContains;
      } else if (kind == "ends_with") {
        e.matcher.kind = ScriptMatcher::Kind::kEndsWith;
      } else {
        throw std::invalid_argument("unknown script matcher kind '" + kind + "'");
      }
      e.matcher.pattern = m.value("pattern", "");
    }
    e.text = item.at("text").get<std::string>();
    e.finish = finish_reason_from_string(item.value("finish", "stop"));
    e.repeat = item.value("repeat", false);
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ScriptEntry> ScriptedBackend::entries_from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open script " + path.string());
  return entries_from_json(nlohmann::json::parse(in));
}

std::vector<CompletionResult> ScriptedBackend::complete(
    const CompletionRequest& request) {
  request.validate();
  std::vector<CompletionResult> results;
  {
    std::lock_guard lock(mu_);
    prompts_.push_back(request.prompt);
    for (int i = 0; i < request.n; ++i) {
      std::size_t chosen = entries_.size();
      for (std::size_t e = 0; e < entries_.size(); ++e) {
        if (!consumed_[e] && entries_[e].matcher.matches(request.prompt)) {
          chosen = e;
          break;
        }
      }
      if (chosen == entries_.size()) {
        throw ScriptGapError("no script entry matches call " +
                             std::to_string(prompts_.size() - 1) +
                             " (prompt tail: '" +
                             request.prompt.substr(request.prompt.size() -
                                                   std::min<std::size_t>(
                                                       40, request.prompt.size())) +
                             "')");
      }
      const ScriptEntry& entry = entries_[chosen];
      if (!entry.repeat) consumed_[chosen] = true;
      auto cut = cut_continuation(entry.text, request,
                                  entry.finish == FinishReason::kStop);
      if (!cut) {
        throw ScriptGapError("script entry " + std::to_string(chosen) +
                             " ends with 'length' but has fewer than " +
                             std::to_string(request.max_tokens) + " words");
      }
      results.push_back(std::move(*cut));
    }
  }
  record(results);
  return results;
}

std::vector<std::string> ScriptedBackend::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    if (!consumed_[e] && !entries_[e].repeat) ++n;
  }
  return n;
}

ScriptedBackend script_define(std::vector<ScriptEntry> entries) {
  return ScriptedBackend(std::move(entries));
}

}  // namespace idsample
