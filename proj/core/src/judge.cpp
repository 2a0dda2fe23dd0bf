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

#include "hazlens/judge.hpp"

#include <cmath>
#include <optional>

#include <nlohmann/json.hpp>

#include "hazlens/encoding.hpp"
#include "hazlens/prompt_assets.hpp"
#include "hazlens/prompting.hpp"

namespace hazlens {

using json = nlohmann::json;

namespace {

constexpr const char* kCriteria[] = {"completeness", "accuracy", "clarity"};

// End offset (exclusive) of the balanced {...} starting at `open`, honoring
// JSON string literals.
std::optional<std::size_t> balanced_object_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

int criterion_value(const json& obj, const char* key) {
  const json& v = obj.at(key);
  double d = 0.0;
  if (v.is_number_integer()) {
    d = static_cast<double>(v.get<long long>());
  } else if (v.is_number_float()) {
    d = v.get<double>();
    if (d != std::floor(d)) throw JudgeError(std::string("judge score '") + key + "' is not an integer");
  } else {
    throw JudgeError(std::string("judge score '") + key + "' is not a number");
  }
  if (d < kJudgeMinScore || d > kJudgeMaxScore) {
    throw JudgeError(std::string("judge score '") + key + "' = " + v.dump() + " is out of range [1, 5]");
  }
  return static_cast<int>(d);
}

}  // namespace

std::string build_judge_prompt(std::string_view predicted, std::string_view ground_truth) {
  if (is_blank(predicted) || is_blank(ground_truth)) {
    throw JudgeError("judge prompt needs non-empty prediction and ground truth");
  }
  return render_template(assets::judge_rubric(), {{"prediction", std::string(predicted)},
                                                  {"ground_truth", std::string(ground_truth)}});
}

JudgeScores parse_judge_output(std::string_view text) {
  if (is_blank(text)) throw JudgeError("judge output is empty");
  std::optional<std::string> missing;
  for (std::size_t pos = text.find('{'); pos != std::string_view::npos; pos = text.find('{', pos + 1)) {
    const auto end = balanced_object_end(text, pos);
    if (!end) continue;
    const json obj = json::parse(text.substr(pos, *end - pos), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) continue;
    bool complete = true;
    for (const char* key : kCriteria) {
      if (!obj.contains(key)) {
        complete = false;
        if (!missing) missing = key;
      }
    }
    if (!complete) continue;
    return JudgeScores{criterion_value(obj, "completeness"), criterion_value(obj, "accuracy"),
                       criterion_value(obj, "clarity")};
  }
  if (missing) throw JudgeError("judge output is missing key '" + *missing + "'");
  throw JudgeError("no JSON object found in judge output");
}

double normalized_score(const JudgeScores& s) {
  return static_cast<double>(s.completeness + s.accuracy + s.clarity) /
         static_cast<double>(kJudgeCriteria * kJudgeMaxScore);
}

JudgeScores judge_sample(const JudgeConfig& config, std::string_view predicted, std::string_view ground_truth,
                         const ImageAttachment* image) {
  if (!config.provider) throw JudgeError("judge has no provider configured");
  const std::string prompt = build_judge_prompt(predicted, ground_truth);
  const CompletionResult r =
      config.provider->complete(prompt, config.include_image ? image : nullptr, config.params);
  return parse_judge_output(r.text);
}

}  // namespace hazlens
