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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "idsample/aggregation.h"
#include "idsample/checker.h"
#include "idsample/engine.h"
#include "idsample/harness.h"
#include "idsample/scheduler.h"

namespace py = pybind11;
using namespace idsample;

namespace {

nlohmann::json to_json(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) return nlohmann::json::parse(obj.cast<std::string>());
  const auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(obj).cast<std::string>());
}

py::object from_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<Problem> problems_from(const py::list& records) {
  std::vector<Problem> problems;
  for (const auto& r : records) {
    const auto d = r.cast<py::dict>();
    problems.push_back({py::str(d["id"]), py::str(d["question"]), py::str(d["answer"])});
  }
  return problems;
}

nlohmann::json trajectory_json(const Trajectory& t) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : t.rounds) {
    rounds.push_back({{"text", r.text},
                      {"allocated", r.allocated},
                      {"used", r.used},
                      {"finish", to_string(r.finish)},
                      {"padding", r.padding},
                      {"trigger_suppressed", r.trigger_suppressed}});
  }
  return {{"prompt", t.prompt},
          {"rounds", rounds},
          {"trigger_count", t.trigger_count},
          {"status", to_string(t.status)},
          {"generated_text", t.generated_text()},
          {"generated_tokens", t.ledger.generated()},
          {"calls", t.ledger.calls()}};
}

CandidateSet answers_to_set(const std::vector<std::string>& answers) {
  CandidateSet set;
  for (const auto& a : answers) {
    Candidate c;
    c.raw = {a, AnswerOrigin::kBoxed};
    c.key = AnswerKey::from_text(a);
    set.candidates.push_back(std::move(c));
  }
  return set;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Iterative deepening sampling: scheduling, checking, aggregation, harness";
  m.attr("DEFAULT_TRIGGER_TEXT") = std::string(kDefaultTriggerText);

  m.def("plan_rounds",
        [](Tokens b0, double gamma, Tokens max_total) {
          return plan_rounds(BudgetSchedule(b0, gamma, max_total));
        },
        py::arg("initial_budget") = 256, py::arg("gamma") = 2.0,
        py::arg("max_total") = 8192);
  m.def("round_budget",
        [](Tokens b0, double gamma, Tokens max_total, int k) {
          return round_budget(BudgetSchedule(b0, gamma, max_total), k);
        },
        py::arg("initial_budget"), py::arg("gamma"), py::arg("max_total"), py::arg("k"));
  m.def("rounds_to_exhaust",
        [](Tokens b0, double gamma, Tokens max_total) {
          return rounds_to_exhaust(BudgetSchedule(b0, gamma, max_total));
        },
        py::arg("initial_budget"), py::arg("gamma"), py::arg("max_total"));
  m.def("overhead_bound", &overhead_bound, py::arg("gamma"), py::arg("final_round_budget"));

  m.def("pad_trigger",
        [](const std::string& prefix, const std::string& trigger_text,
           const std::string& separator, std::size_t window) {
          TriggerPolicy p;
          p.trigger_text = trigger_text;
          p.separator = separator;
          p.redundancy_window = window;
          return pad_trigger(prefix, p);
        },
        py::arg("prefix"), py::arg("trigger_text") = std::string(kDefaultTriggerText),
        py::arg("separator") = "\n", py::arg("redundancy_window") = 256);

  m.def("id_sample_scripted",
        [](const std::string& prompt, const py::object& script, Tokens b0, double gamma,
           Tokens max_total) {
          ScriptedBackend backend(ScriptedBackend::entries_from_json(to_json(script)));
          const Trajectory t = id_sample(prompt, BudgetSchedule(b0, gamma, max_total),
                                         TriggerPolicy{}, StepBoundaryPolicy{}, backend,
                                         SamplingParams{});
          return from_json(trajectory_json(t));
        },
        py::arg("prompt"), py::arg("script"), py::arg("initial_budget") = 256,
        py::arg("gamma") = 2.0, py::arg("max_total") = 8192,
        "Runs one trajectory against a scripted backend and returns it as a dict.");

  m.def("canonical", [](const std::string& text) { return AnswerKey::from_text(text).display(); },
        py::arg("text"));
  m.def("answer_kind",
        [](const std::string& text) {
          switch (AnswerKey::from_text(text).kind()) {
            case AnswerKey::Kind::kExact: return "exact";
            case AnswerKey::Kind::kNumeric: return "numeric";
            case AnswerKey::Kind::kOpaque: return "opaque";
            case AnswerKey::Kind::kMissing: return "missing";
          }
          return "missing";
        },
        py::arg("text"));
  m.def("equivalent",
        [](const std::string& a, const std::string& b) {
          return equivalent(AnswerKey::from_text(a), AnswerKey::from_text(b));
        },
        py::arg("a"), py::arg("b"));
  m.def("extract_final_answer",
        [](const std::string& response) -> std::optional<std::string> {
          const RawAnswer raw = extract_final_answer(response);
          if (raw.origin == AnswerOrigin::kNone) return std::nullopt;
          return raw.text;
        },
        py::arg("response"));

  m.def("best_of_n",
        [](const std::vector<double>& scores, std::optional<std::size_t> k) {
          CandidateSet set;
          for (double s : scores) {
            Candidate c;
            c.score = s;
            set.candidates.push_back(std::move(c));
          }
          return best_of_n(set, k.value_or(set.size()));
        },
        py::arg("scores"), py::arg("k") = py::none());
  m.def("majority_vote",
        [](const std::vector<std::string>& answers, std::optional<std::size_t> k,
           std::optional<std::vector<double>> weights) {
          const CandidateSet set = answers_to_set(answers);
          const VoteTally t = majority_vote(set, k.value_or(set.size()), weights);
          py::dict out;
          out["classes"] = t.classes;
          out["weights"] = t.weights;
          out["winner"] = t.winner;
          out["representative"] = t.representative();
          out["comparisons"] = t.comparisons;
          return out;
        },
        py::arg("answers"), py::arg("k") = py::none(), py::arg("weights") = py::none());

  m.def("equivalent_n", &equivalent_n, py::arg("actual_n"), py::arg("relative_time"));
  m.def("k_grid", &k_grid, py::arg("n"));

  m.def("load_dataset",
        [](const std::string& path) {
          py::list out;
          for (const auto& p : load_dataset(path)) {
            py::dict d;
            d["id"] = p.id;
            d["question"] = p.question;
            d["answer"] = p.gold_answer;
            out.append(d);
          }
          return out;
        },
        py::arg("path"));
  m.def("run",
        [](const py::object& config, const py::list& dataset) {
          const RunConfig c = RunConfig::from_json(to_json(config));
          const auto problems = problems_from(dataset);
          nlohmann::json report;
          {
            py::gil_scoped_release release;
            report = run(problems, c).to_json();
          }
          return from_json(report);
        },
        py::arg("config"), py::arg("dataset"),
        "Runs a config (dict or JSON text) over a list of {id, question, answer}.");
  m.def("compare",
        [](const py::list& reports, const std::string& metric) {
          if (metric != "cost" && metric != "wall") {
            throw py::value_error("metric must be 'cost' or 'wall'");
          }
          std::vector<RunReport> parsed;
          for (const auto& r : reports) {
            parsed.push_back(RunReport::from_json(to_json(py::reinterpret_borrow<py::object>(r))));
          }
          return from_json(compare_runs(parsed, metric == "wall" ? TimeMetric::kWall
                                                                 : TimeMetric::kCost)
                               .to_json());
        },
        py::arg("reports"), py::arg("metric") = "cost",
        "Compares reports; the first is the baseline.");

  py::register_exception<UnparseableAnswer>(m, "UnparseableAnswer", PyExc_ValueError);
  py::register_exception<DatasetError>(m, "DatasetError", PyExc_ValueError);
  py::register_exception<ComparisonError>(m, "ComparisonError", PyExc_ValueError);
  py::register_exception<ScoringRequired>(m, "ScoringRequired", PyExc_ValueError);
  py::register_exception<BackendError>(m, "BackendError", PyExc_RuntimeError);
}
