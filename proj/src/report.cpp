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
#include <cstdio>
#include <fstream>
#include <sstream>

#include "idsample/harness.h"

namespace idsample {

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

nlohmann::json sample_to_json(const SampleRecord& s) {
  return {{"response", s.response},
          {"answer", s.answer},
          {"canonical", s.canonical},
          {"correct", s.correct},
          {"score", optional_number(s.score)},
          {"status", s.status},
          {"rounds", s.rounds},
          {"trigger_count", s.trigger_count},
          {"allocated", s.allocated},
          {"generated", s.generated},
          {"snap_tokens", s.snap_tokens},
          {"prompt_tokens", s.prompt_tokens},
          {"trigger_tokens", s.trigger_tokens},
          {"calls", s.calls},
          {"cost_units", s.cost_units},
          {"latency_s", s.latency_s},
          {"error", s.error}};
}

SampleRecord sample_from_json(const nlohmann::json& j) {
  SampleRecord s;
  s.response = j.at("response").get<std::string>();
  s.answer = j.at("answer").get<std::string>();
  s.canonical = j.at("canonical").get<std::string>();
  s.correct = j.at("correct").get<bool>();
  s.score = read_optional(j, "score");
  s.status = j.at("status").get<std::string>();
  s.rounds = j.at("rounds").get<int>();
  s.trigger_count = j.at("trigger_count").get<int>();
  s.allocated = j.at("allocated").get<Tokens>();
  s.generated = j.at("generated").get<Tokens>();
  s.snap_tokens = j.at("snap_tokens").get<Tokens>();
  s.prompt_tokens = j.at("prompt_tokens").get<Tokens>();
  s.trigger_tokens = j.at("trigger_tokens").get<Tokens>();
  s.calls = j.at("calls").get<int>();
  s.cost_units = j.at("cost_units").get<double>();
  s.latency_s = j.value("latency_s", 0.0);
  s.error = j.value("error", "");
  return s;
}

// Strips wall-clock measurements so two runs can be compared byte for byte.
void strip_wall_clock(nlohmann::json& j) {
  if (j.is_object()) {
    for (const char* key : {"wall_time_s", "latency_s", "relative_wall"}) j.erase(key);
    for (auto& [_, v] : j.items()) strip_wall_clock(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_wall_clock(v);
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string signed_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.*f", digits, v);
  return buf;
}

}  // namespace

nlohmann::json RunReport::to_json() const {
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& q : questions) {
    nlohmann::json samples_json = nlohmann::json::array();
    for (const auto& s : q.samples) samples_json.push_back(sample_to_json(s));
    qs.push_back({{"id", q.id},
                  {"gold_answer", q.gold_answer},
                  {"errored", q.errored},
                  {"error", q.error},
                  {"samples", samples_json},
                  {"bon_correct", q.bon_correct},
                  {"cons_correct", q.cons_correct}});
  }
  nlohmann::json curve_json = nlohmann::json::array();
  for (const auto& p : curve) {
    curve_json.push_back({{"k", p.k}, {"bon", optional_number(p.bon)}, {"cons", p.cons}});
  }
  nlohmann::json j = {
      {"name", name},
      {"method", method},
      {"backend", backend},
      {"dataset_fingerprint", dataset_fingerprint},
      {"n", n},
      {"config", config},
      {"ks", ks},
      {"questions", qs},
      {"questions_total", questions_total},
      {"questions_errored", questions_errored},
      {"pass_at_1", pass_at_1},
      {"mean_sample_accuracy", mean_sample_accuracy},
      {"curve", curve_json},
      {"totals",
       {{"allocated", totals.allocated},
        {"generated", totals.generated},
        {"snap_tokens", totals.snap_tokens},
        {"prompt_tokens", totals.prompt_tokens},
        {"trigger_tokens", totals.trigger_tokens},
        {"calls", totals.calls},
        {"cost_units", totals.cost_units},
        {"wall_time_s", totals.wall_time_s}}},
      {"relative", nullptr},
  };
  if (relative) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : relative->equivalent_n) {
      rows.push_back({{"actual_n", r.actual_n}, {"equivalent_n", r.equivalent_n}});
    }
    j["relative"] = {{"baseline", relative->baseline},
                     {"relative_cost", relative->relative_cost},
                     {"relative_wall", relative->relative_wall},
                     {"equivalent_n", rows}};
  }
  return j;
}

RunReport RunReport::from_json(const nlohmann::json& j) {
  RunReport r;
  r.name = j.at("name").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.backend = j.value("backend", "");
  r.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
  r.n = j.at("n").get<int>();
  r.config = j.value("config", nlohmann::json::object());
  r.ks = j.at("ks").get<std::vector<int>>();
  for (const auto& qj : j.at("questions")) {
    QuestionRecord q;
    q.id = qj.at("id").get<std::string>();
    q.gold_answer = qj.at("gold_answer").get<std::string>();
    q.errored = qj.at("errored").get<bool>();
    q.error = qj.value("error", "");
    for (const auto& sj : qj.at("samples")) q.samples.push_back(sample_from_json(sj));
    q.bon_correct = qj.at("bon_correct").get<std::vector<int>>();
    q.cons_correct = qj.at("cons_correct").get<std::vector<int>>();
    r.questions.push_back(std::move(q));
  }
  r.questions_total = j.at("questions_total").get<int>();
  r.questions_errored = j.at("questions_errored").get<int>();
  r.pass_at_1 = j.at("pass_at_1").get<double>();
  r.mean_sample_accuracy = j.value("mean_sample_accuracy", 0.0);
  for (const auto& pj : j.at("curve")) {
    r.curve.push_back({pj.at("k").get<int>(), read_optional(pj, "bon"),
                       pj.at("cons").get<double>()});
  }
  const auto& t = j.at("totals");
  r.totals.allocated = t.at("allocated").get<Tokens>();
  r.totals.generated = t.at("generated").get<Tokens>();
  r.totals.snap_tokens = t.at("snap_tokens").get<Tokens>();
  r.totals.prompt_tokens = t.at("prompt_tokens").get<Tokens>();
  r.totals.trigger_tokens = t.at("trigger_tokens").get<Tokens>();
  r.totals.calls = t.at("calls").get<std::int64_t>();
  r.totals.cost_units = t.at("cost_units").get<double>();
  r.totals.wall_time_s = t.value("wall_time_s", 0.0);
  if (j.contains("relative") && !j.at("relative").is_null()) {
    const auto& rj = j.at("relative");
    RelativeCost rel;
    rel.baseline = rj.at("baseline").get<std::string>();
    rel.relative_cost = rj.at("relative_cost").get<double>();
    rel.relative_wall = rj.value("relative_wall", 1.0);
    for (const auto& row : rj.at("equivalent_n")) {
      rel.equivalent_n.push_back(
          {row.at("actual_n").get<int>(), row.at("equivalent_n").get<int>()});
    }
    r.relative = std::move(rel);
  }
  return r;
}

RunReport load_report(const std::filesystem::path& path) {
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(file)) file /= "report.json";
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open report " + file.string());
  try {
    return RunReport::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("report " + file.string() + " is malformed: " + e.what());
  }
}

std::string deterministic_dump(const RunReport& report) {
  nlohmann::json j = report.to_json();
  strip_wall_clock(j);
  return j.dump(2);
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    out << report.to_json().dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + (dir / "report.json").string());
  }
  {
    std::ofstream out(dir / "curves.csv");
    out << "name,method,k,bon,cons,pass_at_1\n";
    for (const auto& p : report.curve) {
      out << report.name << "," << report.method << "," << p.k << ","
          << (p.bon ? fixed(*p.bon, 6) : "") << "," << fixed(p.cons, 6) << ","
          << fixed(report.pass_at_1, 6) << "\n";
    }
  }
  {
    // One block per series, separated by blank lines (gnuplot "index").
    std::ofstream out(dir / "plot.dat");
    out << "# " << report.name << " (" << report.method << "), N=" << report.n << "\n";
    if (report.curve.front().bon) {
      out << "# series: bon\n# k accuracy\n";
      for (const auto& p : report.curve) out << p.k << " " << fixed(*p.bon, 6) << "\n";
      out << "\n\n";
    }
    out << "# series: cons\n# k accuracy\n";
    for (const auto& p : report.curve) out << p.k << " " << fixed(p.cons, 6) << "\n";
  }
}

Comparison compare_runs(const std::vector<RunReport>& reports, TimeMetric metric) {
  if (reports.empty()) throw ComparisonError("nothing to compare");
  const RunReport& base = reports.front();
  Comparison out;
  out.ks = base.ks;
  const auto time_of = [&](const RunReport& r) {
    return metric == TimeMetric::kCost ? r.totals.cost_units : r.totals.wall_time_s;
  };
  for (const auto& r : reports) {
    if (r.dataset_fingerprint != base.dataset_fingerprint) {
      throw ComparisonError("'" + r.name + "' ran on a different dataset than '" +
                            base.name + "'");
    }
    if (r.n != base.n || r.ks != base.ks) {
      throw ComparisonError("'" + r.name + "' used N=" + std::to_string(r.n) + ", '" +
                            base.name + "' used N=" + std::to_string(base.n));
    }
    ComparisonRow row;
    row.name = r.name;
    row.method = r.method;
    const double t0 = time_of(base);
    const double t = time_of(r);
    if (t0 > 0) {
      row.relative_time = t / t0;
    } else if (t > 0) {
      throw ComparisonError("baseline '" + base.name + "' has zero time");
    }
    row.pass_at_1 = r.pass_at_1;
    row.pass_at_1_delta = r.pass_at_1 - base.pass_at_1;
    for (std::size_t g = 0; g < r.curve.size(); ++g) {
      const auto& p = r.curve[g];
      const auto& b = base.curve[g];
      row.bon.push_back(p.bon);
      row.bon_delta.push_back(p.bon && b.bon ? std::optional(*p.bon - *b.bon)
                                             : std::nullopt);
      row.cons.push_back(p.cons);
      row.cons_delta.push_back(p.cons - b.cons);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string Comparison::to_text() const {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-24s %-12s %8s %14s", "run", "method", "rel_time",
                "pass@1");
  os << buf;
  for (int k : ks) {
    std::snprintf(buf, sizeof(buf), " %16s %16s", ("bon@" + std::to_string(k)).c_str(),
                  ("cons@" + std::to_string(k)).c_str());
    os << buf;
  }
  os << "\n";
  auto cell = [](double v, double d) { return fixed(v, 3) + " (" + signed_fixed(d, 3) + ")"; };
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-24s %-12s %8s %14s", r.name.c_str(), r.method.c_str(),
                  fixed(r.relative_time, 2).c_str(),
                  cell(r.pass_at_1, r.pass_at_1_delta).c_str());
    os << buf;
    for (std::size_t g = 0; g < ks.size(); ++g) {
      const std::string bon = r.bon[g] ? cell(*r.bon[g], r.bon_delta[g].value_or(0.0)) : "-";
      std::snprintf(buf, sizeof(buf), " %16s %16s", bon.c_str(),
                    cell(r.cons[g], r.cons_delta[g]).c_str());
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::string Comparison::to_csv() const {
  std::ostringstream os;
  os << "name,method,relative_time,k,bon,bon_delta,cons,cons_delta,pass_at_1,pass_at_1_delta\n";
  for (const auto& r : rows) {
    for (std::size_t g = 0; g < ks.size(); ++g) {
      os << r.name << "," << r.method << "," << fixed(r.relative_time, 6) << "," << ks[g]
         << "," << (r.bon[g] ? fixed(*r.bon[g], 6) : "") << ","
         << (r.bon_delta[g] ? fixed(*r.bon_delta[g], 6) : "") << "," << fixed(r.cons[g], 6)
         << "," << fixed(r.cons_delta[g], 6) << "," << fixed(r.pass_at_1, 6) << ","
         << fixed(r.pass_at_1_delta, 6) << "\n";
    }
  }
  return os.str();
}

nlohmann::json Comparison::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json bon = nlohmann::json::array();
    nlohmann::json bon_delta = nlohmann::json::array();
    for (std::size_t g = 0; g < ks.size(); ++g) {
      bon.push_back(optional_number(r.bon[g]));
      bon_delta.push_back(optional_number(r.bon_delta[g]));
    }
    rows_json.push_back({{"name", r.name},
                         {"method", r.method},
                         {"relative_time", r.relative_time},
                         {"pass_at_1", r.pass_at_1},
                         {"pass_at_1_delta", r.pass_at_1_delta},
                         {"bon", bon},
                         {"bon_delta", bon_delta},
                         {"cons", r.cons},
                         {"cons_delta", r.cons_delta}});
  }
  return {{"ks", ks}, {"rows", rows_json}};
}

}  // namespace idsample
