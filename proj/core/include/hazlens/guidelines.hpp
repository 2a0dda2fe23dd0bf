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

// Safety-guideline taxonomy: the hazard categories and the site conditions
// that indicate each one. A GuidelineSet seeds every engineered prompt.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace hazlens {

struct Guideline {
  int id = 0;
  std::string hazard_name;
  std::string conditions;

  bool operator==(const Guideline&) const = default;
};

/// Ordered, validated list of guidelines. Order is preserved from the source
/// document and is significant for prompt rendering.
class GuidelineSet {
 public:
  /// Validates ids (positive, unique) and non-blank fields. Throws
  /// GuidelineError.
  GuidelineSet(std::vector<Guideline> guidelines, std::string source_label);

  const std::vector<Guideline>& guidelines() const noexcept { return guidelines_; }
  const std::string& source_label() const noexcept { return source_label_; }
  std::size_t size() const noexcept { return guidelines_.size(); }

  /// Content equality; the source label is not part of the content.
  bool same_content(const GuidelineSet& other) const {
    return guidelines_ == other.guidelines_;
  }

 private:
  std::vector<Guideline> guidelines_;
  std::string source_label_;
};

/// Parses the guideline document format: a JSON array of
/// {"id": int, "hazard": string, "conditions": string}. Fields are trimmed.
GuidelineSet parse_guidelines(std::string_view document, std::string source_label);
GuidelineSet guidelines_from_json(const nlohmann::json& rows, std::string source_label);

/// Reads and parses a guideline file; the path becomes the source label.
GuidelineSet load_guidelines(const std::filesystem::path& path);

/// Inverse of parse_guidelines.
nlohmann::json guidelines_to_json(const GuidelineSet& set);

/// One numbered line per guideline:
///   "<id>. <hazard>: <conditions>"
std::string render_guidelines_text(const GuidelineSet& set);

}  // namespace hazlens
