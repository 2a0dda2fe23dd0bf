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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hazlens/harness.hpp"

namespace hazlens {

enum class ReportFormat { kJson, kCsv, kMarkdown };

std::string_view to_string(ReportFormat f);
ReportFormat parse_report_format(std::string_view name);

// Byte-deterministic for a fixed table.
std::string render_json(const EvalTable& table);
std::string render_csv(const EvalTable& table);
std::string render_markdown(const EvalTable& table);

/// Writes report.json / report.csv / report.md into `out_dir` (created if
/// missing) and returns the written paths. Throws ReportError when the table
/// has no rows or a file cannot be written.
std::vector<std::filesystem::path> emit_report(const EvalTable& table, const std::filesystem::path& out_dir,
                                               const std::vector<ReportFormat>& formats);

}  // namespace hazlens
