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

#include <cstdlib>
#include <fstream>
#include <set>

#include "idsample/harness.h"
#include "idsample/hashing.h"

namespace idsample {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& p,
                              const std::filesystem::path& base_dir) {
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

std::string api_key_from_env(const std::string& var) {
  if (var.empty()) return {};
  const char* value = std::getenv(var.c_str());
  return value ? value : "";
}

}  // namespace

std::string_view to_string(Method method) {
  return method == Method::kVanilla ? "vanilla" : "id_sampling";
}

Method method_from_string(std::string_view text) {
  if (text == "vanilla") return Method::kVanilla;
  if (text == "id_sampling") return Method::kIdSampling;
  throw std::invalid_argument("unknown method '" + std::string(text) +
                              "' (expected vanilla or id_sampling)");
}

void RunConfig::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  if (!(temperature >= 0)) throw std::invalid_argument("temperature must be >= 0");
  if (!(prefill_cost_per_token >= 0)) {
    throw std::invalid_argument("prefill_cost_per_token must be >= 0");
  }
  if (prompt_template.find("{question}") == std::string::npos) {
    throw std::invalid_argument("prompt_template must contain {question}");
  }
  trigger.validate();
  boundary.validate();
  if (backend.kind != "stochastic" && backend.kind != "scripted" && backend.kind != "http") {
    throw std::invalid_argument("unknown backend kind '" + backend.kind + "'");
  }
  if (backend.kind == "scripted" && backend.script.empty()) {
    throw std::invalid_argument("scripted backend needs a script file");
  }
  if (scorer.kind != "stub" && scorer.kind != "http" && scorer.kind != "none") {
    throw std::invalid_argument("unknown scorer kind '" + scorer.kind + "'");
  }
}

RunConfig RunConfig::from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  reject_unknown(j,
                 {"name", "method", "n", "initial_budget", "gamma", "max_total_tokens",
                  "trigger_text", "trigger_separator", "redundancy_window",
                  "snap_allowance", "boundary_markers", "temperature", "top_p", "stop",
                  "backend", "scorer", "parallelism", "seed", "prompt_template",
                  "prefill_cost_per_token", "baseline_report"},
                 "config");
  RunConfig c;
  c.name = j.value("name", c.name);
  if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
  c.n = j.value("n", c.n);
  c.schedule = BudgetSchedule(
      j.value("initial_budget", BudgetSchedule::kDefaultInitialBudget),
      j.value("gamma", BudgetSchedule::kDefaultGrowthFactor),
      j.value("max_total_tokens", BudgetSchedule::kDefaultMaxTotal));
  c.trigger.trigger_text = j.value("trigger_text", c.trigger.trigger_text);
  c.trigger.separator = j.value("trigger_separator", c.trigger.separator);
  c.trigger.redundancy_window = j.value("redundancy_window", c.trigger.redundancy_window);
  c.boundary.allowance = j.value("snap_allowance", c.boundary.allowance);
  c.boundary.markers = j.value("boundary_markers", c.boundary.markers);
  c.temperature = j.value("temperature", c.temperature);
  c.top_p = j.value("top_p", c.top_p);
  c.stop = j.value("stop", c.stop);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.seed = j.value("seed", c.seed);
  c.prompt_template = j.value("prompt_template", c.prompt_template);
  c.prefill_cost_per_token = j.value("prefill_cost_per_token", c.prefill_cost_per_token);
  if (j.contains("baseline_report") && !j.at("baseline_report").is_null()) {
    c.baseline_report =
        resolve(j.at("baseline_report").get<std::string>(), base_dir);
  }

  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    reject_unknown(b,
                   {"kind", "base_url", "model", "api_key_env", "timeout_s",
                    "max_in_flight", "script", "simulator"},
                   "backend");
    c.backend.kind = b.value("kind", c.backend.kind);
    c.backend.base_url = b.value("base_url", c.backend.base_url);
    c.backend.model = b.value("model", c.backend.model);
    c.backend.api_key_env = b.value("api_key_env", c.backend.api_key_env);
    c.backend.timeout_s = b.value("timeout_s", c.backend.timeout_s);
    c.backend.max_in_flight = b.value("max_in_flight", c.backend.max_in_flight);
    if (b.contains("script")) {
      c.backend.script = resolve(b.at("script").get<std::string>(), base_dir);
    }
    if (b.contains("simulator")) {
      c.backend.simulator = StochasticModelParams::from_json(b.at("simulator"));
    }
  }
  // The simulator must recognize the trigger the engine inserts.
  c.backend.simulator.trigger_text = c.trigger.trigger_text;

  if (j.contains("scorer")) {
    const auto& s = j.at("scorer");
    reject_unknown(s,
                   {"kind", "seed", "correct_score", "incorrect_score", "noise",
                    "inversion_probability", "base_url", "api_key_env", "timeout_s"},
                   "scorer");
    c.scorer.kind = s.value("kind", c.scorer.kind);
    c.scorer.stub = StubScorerConfig::from_json(s);
    c.scorer.base_url = s.value("base_url", c.scorer.base_url);
    c.scorer.api_key_env = s.value("api_key_env", c.scorer.api_key_env);
    c.scorer.timeout_s = s.value("timeout_s", c.scorer.timeout_s);
  }
  c.validate();
  return c;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json backend_json = {{"kind", backend.kind}};
  if (backend.kind == "http") {
    backend_json["base_url"] = backend.base_url;
    backend_json["model"] = backend.model;
    backend_json["api_key_env"] = backend.api_key_env;
    backend_json["timeout_s"] = backend.timeout_s;
    backend_json["max_in_flight"] = backend.max_in_flight;
  } else if (backend.kind == "scripted") {
    backend_json["script"] = backend.script.string();
  } else {
    backend_json["simulator"] = backend.simulator.to_json();
  }

  nlohmann::json scorer_json = {{"kind", scorer.kind}};
  if (scorer.kind == "stub") {
    scorer_json = scorer.stub.to_json();
  } else if (scorer.kind == "http") {
    scorer_json["base_url"] = scorer.base_url;
    scorer_json["api_key_env"] = scorer.api_key_env;
    scorer_json["timeout_s"] = scorer.timeout_s;
  }

  nlohmann::json j = {
      {"name", name},
      {"method", to_string(method)},
      {"n", n},
      {"initial_budget", schedule.initial_budget()},
      {"gamma", schedule.growth_factor()},
      {"max_total_tokens", schedule.max_total()},
      {"trigger_text", trigger.trigger_text},
      {"trigger_separator", trigger.separator},
      {"redundancy_window", trigger.redundancy_window},
      {"snap_allowance", boundary.allowance},
      {"boundary_markers", boundary.markers},
      {"temperature", temperature},
      {"top_p", top_p},
      {"stop", stop},
      {"backend", backend_json},
      {"scorer", scorer_json},
      {"parallelism", parallelism},
      {"seed", seed},
      {"prompt_template", prompt_template},
      {"prefill_cost_per_token", prefill_cost_per_token},
  };
  if (baseline_report) j["baseline_report"] = baseline_report->string();
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return RunConfig::from_json(j, path.parent_path());
}

std::string render_prompt(const RunConfig& config, const Problem& problem) {
  std::string out = config.prompt_template;
  const std::string_view placeholder = "{question}";
  for (auto at = out.find(placeholder); at != std::string::npos;
       at = out.find(placeholder, at + problem.question.size())) {
    out.replace(at, placeholder.size(), problem.question);
  }
  return out;
}

std::uint64_t sample_seed(std::uint64_t run_seed, const std::string& problem_id,
                          int sample_index) {
  return mix_seed({run_seed, fnv1a64(problem_id), static_cast<std::uint64_t>(sample_index)});
}

std::unique_ptr<CompletionBackend> make_backend(const RunConfig& config,
                                                const std::vector<Problem>& problems) {
  const auto& b = config.backend;
  if (b.kind == "stochastic") {
    auto backend = std::make_unique<StochasticBackend>(b.simulator, config.seed);
    for (const auto& p : problems) backend->register_problem(render_prompt(config, p), p.gold_answer);
    return backend;
  }
  if (b.kind == "scripted") {
    return std::make_unique<ScriptedBackend>(ScriptedBackend::entries_from_file(b.script));
  }
  HttpBackendConfig http;
  http.base_url = b.base_url;
  http.model = b.model;
  http.api_key = api_key_from_env(b.api_key_env);
  http.timeout_s = b.timeout_s;
  http.max_in_flight = b.max_in_flight;
  return std::make_unique<HttpCompletionBackend>(std::move(http));
}

std::unique_ptr<RewardScorer> make_scorer(const RunConfig& config) {
  const auto& s = config.scorer;
  if (s.kind == "none") return nullptr;
  if (s.kind == "stub") return std::make_unique<StubScorer>(s.stub);
  HttpScorerConfig http;
  http.base_url = s.base_url;
  http.api_key = api_key_from_env(s.api_key_env);
  http.timeout_s = s.timeout_s;
  return std::make_unique<HttpScorer>(std::move(http));
}

}  // namespace idsample
