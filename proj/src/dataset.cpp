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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "idsample/harness.h"
#include "idsample/hashing.h"

namespace idsample {

namespace {

std::string field_text(const nlohmann::json& record, const char* key,
                       const std::string& where) {
  if (!record.contains(key)) {
    throw DatasetError(where + ": missing \"" + key + "\"");
  }
  const auto& v = record.at(key);
  if (v.is_string()) return v.get<std::string>();
  // Numeric answers and ids are common in the wild; keep their JSON text.
  if (v.is_number()) return v.dump();
  throw DatasetError(where + ": \"" + key + "\" must be a string or number");
}

}  // namespace

std::vector<Problem> parse_dataset(std::istream& in, const std::string& source) {
  std::vector<Problem> problems;
  std::unordered_set<std::string> seen;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!record.is_object()) throw DatasetError(where + ": expected a JSON object");
    Problem p;
    p.id = field_text(record, "id", where);
    p.question = field_text(record, "question", where);
    p.gold_answer = field_text(record, "answer", where);
    if (p.question.empty()) throw DatasetError(where + ": empty question");
    if (!seen.insert(p.id).second) {
      throw DatasetError(where + ": duplicate id '" + p.id + "'");
    }
    problems.push_back(std::move(p));
  }
  return problems;
}

std::vector<Problem> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  return parse_dataset(in, path.string());
}

std::string dataset_fingerprint(const std::vector<Problem>& problems) {
  std::uint64_t h = fnv1a64("");
  for (const auto& p : problems) {
    for (const std::string* s : {&p.id, &p.question, &p.gold_answer}) {
      h = fnv1a64(*s, h);
      h = fnv1a64(std::string_view("\0", 1), h);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace idsample
