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

// Compiles a GuidelineSet into the inference prompt handed to a vision-language
// model. Two routes:
//   * meta-prompted: a language model writes the prompt from a meta-prompt
//     that embeds the guidelines and the response template;
//   * deterministic: the guidelines and template are interpolated into a fixed
//     skeleton, for offline use and tests.

#pragma once

#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "hazlens/guidelines.hpp"
#include "hazlens/providers.hpp"
#include "hazlens/reportparse.hpp"

namespace hazlens {

struct ResponseTemplate {
  std::string summary_label = "Summary";
  std::string hazard_label = "Hazard No.";
  std::string severity_label = "Severity";
  std::string explanation_label = "Explanation";
  std::string suggestion_label = "Suggestion";
  SeverityScale severity_scale;

  /// Throws PromptError on blank labels or an empty scale.
  void validate() const;
  /// The output format shown to the model.
  std::string render() const;
  nlohmann::json to_json() const;
};

enum class PromptProvenance { kMetaPrompted, kDeterministic };

std::string_view to_string(PromptProvenance p);

struct EngineeredPrompt {
  std::string text;
  std::string guideline_fingerprint;
  std::string template_fingerprint;
  PromptProvenance provenance = PromptProvenance::kDeterministic;

  /// Short content id (first 16 hex digits of the text digest).
  std::string id() const;
  nlohmann::json to_json() const;
  static EngineeredPrompt from_json(const nlohmann::json& j);
};

std::string guideline_fingerprint(const GuidelineSet& set);
std::string template_fingerprint(const ResponseTemplate& tmpl);

/// Replaces every {{name}} with vars[name] in one left-to-right pass;
/// substituted text is not rescanned. Unknown names throw PromptError.
std::string render_template(std::string_view skeleton, const std::map<std::string, std::string>& vars);

std::string build_meta_prompt(const GuidelineSet& set, const ResponseTemplate& tmpl);

/// Sends `meta` to `provider` and keeps the completion verbatim.
/// Throws PromptError("empty engineered prompt") on a blank completion;
/// provider errors propagate unchanged.
EngineeredPrompt engineer_prompt(std::string_view meta, Provider& provider, const GenerationParams& params,
                                 std::string guideline_fp, std::string template_fp);
EngineeredPrompt engineer_prompt(const GuidelineSet& set, const ResponseTemplate& tmpl, Provider& provider,
                                 const GenerationParams& params);

EngineeredPrompt deterministic_prompt(const GuidelineSet& set, const ResponseTemplate& tmpl);

}  // namespace hazlens
