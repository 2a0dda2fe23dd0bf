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

// Structured hazard reports and the tolerant parser that recovers them from
// free-form model output.
//
// Recognized labels (case-insensitive, at a word boundary):
//   Summary:
//   Hazard No. 1:  Hazard No 1:  Hazard 1:  Hazard #1:  Hazard 1.
//   Severity: 8   Severity: 8.   Severity: 8/10
//   Explanation:
//   Suggestion: / Suggestions:
// A field's text runs from its label to the next recognized label, so
// explanations may span several lines.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hazlens/error.hpp"

namespace hazlens {

struct SeverityScale {
  int low = 1;
  int high = 10;

  bool contains(int v) const noexcept { return v >= low && v <= high; }
  bool operator==(const SeverityScale&) const = default;
};

struct HazardRecord {
  int index = 0;  // 1-based position in HazardReport::hazards
  std::string name;
  int severity = 0;
  std::string explanation;
  std::string suggestion;

  bool operator==(const HazardRecord&) const = default;
};

struct HazardReport {
  std::string summary;
  std::vector<HazardRecord> hazards;
  std::string raw_text;

  /// Equality over the structured fields only (raw_text excluded).
  bool same_structure(const HazardReport& other) const {
    return summary == other.summary && hazards == other.hazards;
  }
};

enum class ParseIssueKind { kMissingSummary, kBadSeverity, kTruncatedBlock, kNoHazardBlocks };

std::string_view to_string(ParseIssueKind kind);
ParseIssueKind parse_issue_kind(std::string_view name);

struct ParseIssue {
  ParseIssueKind kind;
  std::size_t location = 0;  // byte offset into raw_text
  std::string message;

  bool operator==(const ParseIssue&) const = default;
};

struct ParsedReport {
  HazardReport report;
  std::vector<ParseIssue> issues;
};

/// Thrown when text contains neither a summary nor any hazard block.
class ReportParseError : public ReportError {
 public:
  ReportParseError(ParseIssueKind kind, std::string message)
      : ReportError(std::move(message)), kind_(kind) {}
  ParseIssueKind kind() const noexcept { return kind_; }

 private:
  ParseIssueKind kind_;
};

/// Best-effort parse. Hazard blocks whose severity is missing, malformed or
/// outside `scale` are dropped and reported as issues; surviving records are
/// renumbered 1..n. Throws ReportParseError only when nothing usable exists.
ParsedReport parse_report(std::string_view text, SeverityScale scale = {});

/// Deterministic text form:
///   Summary: ...
///   Hazard No. k: <name>
///   Severity: <n>
///   Explanation: ...
///   Suggestion: ...
std::string canonicalize(const HazardReport& report);

/// Summary plus hazard names only: "Summary: S ; A; B".
std::string hazard_slice(const HazardReport& report);

nlohmann::json report_to_json(const HazardReport& report);
/// Validates the canonical schema; throws ReportError.
HazardReport report_from_json(const nlohmann::json& j, SeverityScale scale = {});

nlohmann::json issue_to_json(const ParseIssue& issue);
ParseIssue issue_from_json(const nlohmann::json& j);

}  // namespace hazlens
