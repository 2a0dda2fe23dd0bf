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

#include "hazlens/dataset.hpp"

#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "hazlens/encoding.hpp"

namespace hazlens {

using json = nlohmann::json;

DraftGateError::DraftGateError(std::vector<std::string> draft_ids)
    : DatasetError([&] {
        std::string msg = "evaluation refused: dataset contains draft records awaiting review: ";
        for (std::size_t i = 0; i < draft_ids.size(); ++i) {
          if (i) msg += ", ";
          msg += draft_ids[i];
        }
        return msg;
      }()),
      draft_ids_(std::move(draft_ids)) {}

std::string_view to_string(ReviewStatus s) { return s == ReviewStatus::kApproved ? "approved" : "draft"; }

ReviewStatus parse_review_status(std::string_view name) {
  if (name == "draft") return ReviewStatus::kDraft;
  if (name == "approved") return ReviewStatus::kApproved;
  throw DatasetError("unknown review_status '" + std::string(name) + "'");
}

std::string_view to_string(FailureLabel l) {
  switch (l) {
    case FailureLabel::kFalseHazard:
      return "false_hazard";
    case FailureLabel::kContextMisclassification:
      return "context_misclassification";
    case FailureLabel::kHallucination:
      return "hallucination";
  }
  return "unknown";
}

FailureLabel parse_failure_label(std::string_view name) {
  if (name == "false_hazard") return FailureLabel::kFalseHazard;
  if (name == "context_misclassification") return FailureLabel::kContextMisclassification;
  if (name == "hallucination") return FailureLabel::kHallucination;
  throw DatasetError("unknown failure label '" + std::string(name) + "'");
}

json record_to_json(const DatasetRecord& r) {
  json labels = json::array();
  for (FailureLabel l : r.failure_labels) labels.push_back(std::string(to_string(l)));
  json j{{"record_id", r.record_id},
         {"image_ref", r.image_ref},
         {"ground_truth", r.ground_truth ? report_to_json(*r.ground_truth) : json(nullptr)},
         {"review_status", std::string(to_string(r.review_status))},
         {"failure_labels", std::move(labels)}};
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

DatasetRecord record_from_json(const json& j, const std::filesystem::path& base_dir, SeverityScale scale,
                               bool require_image) {
  if (!j.is_object()) throw DatasetError("record must be a JSON object");
  DatasetRecord r;
  try {
    r.record_id = j.at("record_id").get<std::string>();
    r.image_ref = j.at("image_ref").get<std::string>();
    r.review_status = parse_review_status(j.value("review_status", std::string("draft")));
    if (j.contains("failure_labels") && !j.at("failure_labels").is_null()) {
      for (const json& l : j.at("failure_labels")) r.failure_labels.insert(parse_failure_label(l.get<std::string>()));
    }
    if (j.contains("notes") && !j.at("notes").is_null()) r.notes = j.at("notes").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DatasetError(std::string("malformed record: ") + e.what());
  }
  if (is_blank(r.record_id)) throw DatasetError("record_id is blank");
  if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
    try {
      r.ground_truth = report_from_json(j.at("ground_truth"), scale);
    } catch (const ReportError& e) {
      throw DatasetError("record " + r.record_id + ": " + e.what());
    }
  }
  if (r.approved() && (!r.ground_truth || is_blank(r.ground_truth->summary))) {
    throw DatasetError("record " + r.record_id + " is approved but its ground truth has no summary");
  }
  const std::filesystem::path ref(r.image_ref);
  r.image_path = ref.is_absolute() ? ref : base_dir / ref;
  if (require_image && !std::filesystem::is_regular_file(r.image_path)) {
    throw DatasetError("record " + r.record_id + ": image file not found: " + r.image_path.string());
  }
  return r;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path, SeverityScale scale) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot read dataset " + path.string());
  const auto base_dir = path.parent_path();
  std::vector<DatasetRecord> out;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw DatasetError(path.string() + ":" + std::to_string(line_no) + ": malformed JSON line");
    }
    DatasetRecord rec;
    try {
      rec = record_from_json(j, base_dir, scale);
    } catch (const DatasetError& e) {
      throw DatasetError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (auto [it, ok] = seen.emplace(rec.record_id, line_no); !ok) {
      throw DatasetError(path.string() + ":" + std::to_string(line_no) + ": duplicate record_id '" +
                         rec.record_id + "' (first on line " + std::to_string(it->second) + ")");
    }
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw DatasetError("empty dataset: " + path.string());
  return out;
}

void save_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw DatasetError("cannot write " + tmp.string());
    for (const DatasetRecord& r : records) out << record_to_json(r).dump() << '\n';
    if (!out) throw DatasetError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void ensure_evaluable(std::span<const DatasetRecord> records) {
  std::vector<std::string> drafts;
  for (const DatasetRecord& r : records) {
    if (!r.approved()) drafts.push_back(r.record_id);
  }
  if (!drafts.empty()) throw DraftGateError(std::move(drafts));
}

}  // namespace hazlens
