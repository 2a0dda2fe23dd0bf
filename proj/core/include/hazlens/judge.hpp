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

// LLM-as-a-judge: a blind rubric prompt, strict-JSON score extraction and the
// normalized score (sum of criteria over criteria count times top score).

#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "hazlens/providers.hpp"

namespace hazlens {

inline constexpr int kJudgeMinScore = 1;
inline constexpr int kJudgeMaxScore = 5;
inline constexpr int kJudgeCriteria = 3;

struct JudgeScores {
  int completeness = 0;
  int accuracy = 0;
  int clarity = 0;

  bool operator==(const JudgeScores&) const = default;
};

/// Presents ground truth and prediction under neutral labels. No model or
/// provider identity is ever included.
std::string build_judge_prompt(std::string_view predicted, std::string_view ground_truth);

/// Extracts the first JSON object carrying all three criteria. Values must be
/// integers in [1, 5]. Throws JudgeError.
JudgeScores parse_judge_output(std::string_view text);

/// (completeness + accuracy + clarity) / 15, in [0.2, 1.0].
double normalized_score(const JudgeScores& s);

struct JudgeConfig {
  std::shared_ptr<Provider> provider;
  GenerationParams params;
  /// Attach the site image to the judge request. Off by default: the judge
  /// compares texts only.
  bool include_image = false;
};

/// One judge round trip. Throws ProviderError or JudgeError.
JudgeScores judge_sample(const JudgeConfig& config, std::string_view predicted,
                         std::string_view ground_truth, const ImageAttachment* image = nullptr);

}  // namespace hazlens
