// Copyright 2026 The hazlens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hazlens/guidelines.hpp"

#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hazlens/encoding.hpp"
#include "hazlens/error.hpp"

namespace hazlens {

using json = nlohmann::json;

GuidelineSet::GuidelineSet(std::vector<Guideline> guidelines, std::string source_label)
    : guidelines_(std::move(guidelines)), source_label_(std::move(source_label)) {
  if (guidelines_.empty()) throw GuidelineError("no guidelines");
  std::map<int, std::size_t> seen;  // id -> 1-based row
  for (std::size_t i = 0; i < guidelines_.size(); ++i) {
    const Guideline& g = guidelines_[i];
    const std::size_t row = i + 1;
    if (g.id <= 0) {
      throw GuidelineError("row " + std::to_string(row) + ": id must be a positive integer");
    }
    if (is_blank(g.hazard_name)) {
      throw GuidelineError("row " + std::to_string(row) + ": blank hazard name");
    }
    if (is_blank(g.conditions)) {
      throw GuidelineError("row " + std::to_string(row) + ": blank conditions");
    }
    auto [it, inserted] = seen.emplace(g.id, row);
    if (!inserted) {
      throw GuidelineError("duplicate id " + std::to_string(g.id) + " at rows " +
                           std::to_string(it->second) + " and " + std::to_string(row));
    }
  }
}

GuidelineSet guidelines_from_json(const json& rows, std::string source_label) {
  if (!rows.is_array()) throw GuidelineError("guideline document must be a JSON array");
  if (rows.empty()) throw GuidelineError("no guidelines");
  std::vector<Guideline> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& row = rows[i];
    const std::string where = "row " + std::to_string(i + 1);
    if (!row.is_object()) throw GuidelineError(where + ": expected an object");
    const auto id = row.find("id");
    if (id == row.end() || !id->is_number_integer()) {
      throw GuidelineError(where + ": missing integer \"id\"");
    }
    const auto hazard = row.find("hazard");
    const auto conditions = row.find("conditions");
    if (hazard == row.end() || !hazard->is_string()) {
      throw GuidelineError(where + ": missing string \"hazard\"");
    }
    if (conditions == row.end() || !conditions->is_string()) {
      throw GuidelineError(where + ": missing string \"conditions\"");
    }
    const auto raw_id = id->get<long long>();
    if (raw_id <= 0 || raw_id > std::numeric_limits<int>::max()) {
      throw GuidelineError(where + ": id must be a positive integer");
    }
    out.push_back(Guideline{static_cast<int>(raw_id), trim(hazard->get<std::string>()),
                            trim(conditions->get<std::string>())});
  }
  return GuidelineSet(std::move(out), std::move(source_label));
}

GuidelineSet parse_guidelines(std::string_view document, std::string source_label) {
  if (is_blank(document)) throw GuidelineError("no guidelines");
  json rows;
  try {
    rows = json::parse(document);
  } catch (const json::parse_error& e) {
    throw GuidelineError("malformed guideline document: " + std::string(e.what()));
  }
  return guidelines_from_json(rows, std::move(source_label));
}

GuidelineSet load_guidelines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GuidelineError("cannot read guideline file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_guidelines(buf.str(), path.string());
}

json guidelines_to_json(const GuidelineSet& set) {
  json rows = json::array();
  for (const Guideline& g : set.guidelines()) {
    rows.push_back({{"id", g.id}, {"hazard", g.hazard_name}, {"conditions", g.conditions}});
  }
  return rows;
}

std::string render_guidelines_text(const GuidelineSet& set) {
  std::string out;
  for (const Guideline& g : set.guidelines()) {
    out += std::to_string(g.id);
    out += ". ";
    out += g.hazard_name;
    out += ": ";
    out += g.conditions;
    out += '\n';
  }
  return out;
}

}  // namespace hazlens
