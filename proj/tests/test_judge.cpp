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

#include <gtest/gtest.h>

#include "hazlens/judge.hpp"
#include "hazlens/stub_provider.hpp"

namespace hazlens {
namespace {

TEST(Judge, HandCases) {
  EXPECT_EQ(normalized_score({4, 5, 4}), 13.0 / 15.0);
  EXPECT_EQ(normalized_score({5, 5, 5}), 1.0);
  EXPECT_EQ(normalized_score({1, 1, 1}), 0.2);
}

TEST(Judge, ExhaustiveRangeAndMonotonicity) {
  for (int c = 1; c <= 5; ++c) {
    for (int a = 1; a <= 5; ++a) {
      for (int l = 1; l <= 5; ++l) {
        const double s = normalized_score({c, a, l});
        EXPECT_GE(s, 0.2);
        EXPECT_LE(s, 1.0);
        EXPECT_EQ(s * 15.0, c + a + l);
        if (c < 5) {
          EXPECT_LT(s, normalized_score({c + 1, a, l}));
        }
        if (a < 5) {
          EXPECT_LT(s, normalized_score({c, a + 1, l}));
        }
        if (l < 5) {
          EXPECT_LT(s, normalized_score({c, a, l + 1}));
        }
      }
    }
  }
}

TEST(Judge, ParsesStrictAndWrappedJson) {
  EXPECT_EQ(parse_judge_output(R"({"completeness": 4, "accuracy": 5, "clarity": 4})"), (JudgeScores{4, 5, 4}));
  EXPECT_EQ(parse_judge_output("Here you go:\n```json\n{\"clarity\":2,\"accuracy\":3,\"completeness\":1}\n```"),
            (JudgeScores{1, 3, 2}));
  EXPECT_EQ(parse_judge_output(R"({"note": "a } brace"} {"completeness": 3.0, "accuracy": 3, "clarity": 3})"),
            (JudgeScores{3, 3, 3}));
}

TEST(Judge, RejectsBadOutput) {
  EXPECT_THROW(parse_judge_output(""), JudgeError);
  EXPECT_THROW(parse_judge_output("Scores: 4, 5, 4"), JudgeError);
  EXPECT_THROW(parse_judge_output(R"({"completeness": 6, "accuracy": 5, "clarity": 4})"), JudgeError);
  EXPECT_THROW(parse_judge_output(R"({"completeness": 0, "accuracy": 5, "clarity": 4})"), JudgeError);
  EXPECT_THROW(parse_judge_output(R"({"completeness": 4.5, "accuracy": 5, "clarity": 4})"), JudgeError);
  EXPECT_THROW(parse_judge_output(R"({"completeness": "4", "accuracy": 5, "clarity": 4})"), JudgeError);
  try {
    parse_judge_output(R"({"completeness": 4, "accuracy": 5})");
    FAIL();
  } catch (const JudgeError& e) {
    EXPECT_NE(std::string(e.what()).find("clarity"), std::string::npos);
  }
}

TEST(Judge, PromptIsBlindToModelIdentity) {
  const std::string pred = "Summary: Open trench.\nHazard No. 1: Trench\nSeverity: 7";
  const std::string gt = "Summary: Trench near workers.";
  const std::string prompt = build_judge_prompt(pred, gt);
  EXPECT_NE(prompt.find(pred), std::string::npos);
  EXPECT_NE(prompt.find(gt), std::string::npos);
  for (const char* id : {"gpt-4o", "gemini-1.5-pro", "llama-3.2-11b-vision", "internvl2-8b", "vlm-alpha",
                         "vlm-beta", "alpha-1", "beta-1"}) {
    EXPECT_EQ(prompt.find(id), std::string::npos) << id;
  }
  for (const char* key : {"completeness", "accuracy", "clarity"}) {
    EXPECT_NE(prompt.find(key), std::string::npos) << key;
  }
  EXPECT_THROW(build_judge_prompt("", gt), JudgeError);
  EXPECT_THROW(build_judge_prompt(pred, "  "), JudgeError);
}

TEST(Judge, SampleRoundTripThroughStub) {
  StubSpec spec;
  spec.default_text = R"({"completeness": 4, "accuracy": 5, "clarity": 4})";
  auto stub = std::make_shared<StubProvider>("judge", spec);
  JudgeConfig config{stub, GenerationParams{0.3, 250, "judge-1"}, false};
  EXPECT_EQ(judge_sample(config, "Summary: a", "Summary: b"), (JudgeScores{4, 5, 4}));
  EXPECT_EQ(stub->complete_calls(), 1u);
  EXPECT_THROW(judge_sample(JudgeConfig{}, "a", "b"), JudgeError);

  StubSpec garbled;
  garbled.default_text = "I would rate this highly.";
  JudgeConfig bad{std::make_shared<StubProvider>("judge", garbled), GenerationParams{0.3, 250, "judge-1"}, false};
  EXPECT_THROW(judge_sample(bad, "Summary: a", "Summary: b"), JudgeError);
}

}  // namespace
}  // namespace hazlens
