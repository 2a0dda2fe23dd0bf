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

// Image/ground-truth datasets stored as JSONL, one record per line:
//   {"record_id": "...", "image_ref": "images/a.png",
//    "ground_truth": <canonical report JSON or null>,
//    "review_status": "draft" | "approved",
//    "failure_labels": ["false_hazard", ...], "notes": ["..."]}
// image_ref is resolved relative to the dataset file.

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hazlens/reportparse.hpp"

namespace hazlens {

enum class ReviewStatus { kDraft, kApproved };

std::string_view to_string(ReviewStatus s);
ReviewStatus parse_review_status(std::string_view name);

enum class FailureLabel { kFalseHazard, kContextMisclassification, kHallucination };

std::string_view to_string(FailureLabel l);
FailureLabel parse_failure_label(std::string_view name);

struct DatasetRecord {
  std::string record_id;
  std::string image_ref;            // as written in the file
  std::filesystem::path image_path;  // resolved
  std::optional<HazardReport> ground_truth;
  ReviewStatus review_status = ReviewStatus::kDraft;
  std::set<FailureLabel> failure_labels;
  std::vector<std::string> notes;

  bool approved() const noexcept { return review_status == ReviewStatus::kApproved; }
};

nlohmann::json record_to_json(const DatasetRecord& r);
/// `base_dir` resolves image_ref. Throws DatasetError.
DatasetRecord record_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                               SeverityScale scale = {}, bool require_image = true);

/// Throws DatasetError on an empty file, a malformed line (with its line
/// number), duplicate ids or a missing image (naming the record).
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path, SeverityScale scale = {});

/// Rewrites the whole file atomically.
void save_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records);

/// Draft gate: throws DraftGateError listing every draft record id.
void ensure_evaluable(std::span<const DatasetRecord> records);

}  // namespace hazlens
