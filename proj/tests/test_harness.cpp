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

#include <atomic>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hazlens/config.hpp"
#include "hazlens/harness.hpp"
#include "support.hpp"

namespace hazlens {
namespace {

using nlohmann::json;

struct Golden {
  HarnessConfig config = load_config(testing::fixture_dir() / "golden_config.json");
  std::vector<DatasetRecord> records = load_dataset(config.dataset, config.run.scale);
};

RegistryOptions cache_in(const testing::TempDir& dir, bool cache) {
  RegistryOptions o;
  o.cache = cache;
  o.cache_dir = dir / "cache";
  return o;
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrowsLowest) {
  for (int c : {1, 3, 16}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, c, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 31) throw std::runtime_error("boom " + std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "boom 7");
  }
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Harness, RunsEveryModelOverEveryRecord) {
  const testing::TempDir dir;
  const Golden g;
  const ProviderRegistry reg(g.config, cache_in(dir, false));
  const RunConfig rc = build_run_config(g.config, reg, resolve_prompt(g.config, reg));
  const auto results = run_models(rc, g.records);
  ASSERT_EQ(results.size(), 20u);
  EXPECT_EQ(results[0].model_id, "vlm-alpha");
  EXPECT_EQ(results[0].record_id, "site-01");
  EXPECT_EQ(results[10].model_id, "vlm-beta");
  EXPECT_EQ(results[19].record_id, "site-10");
  EXPECT_EQ(reg.stub("alpha")->complete_calls(), 10u);
  EXPECT_EQ(reg.stub("beta")->complete_calls(), 10u);

  // vlm-beta refuses site-07; the rest of the batch survives.
  const RunResult& failed = results[16];
  EXPECT_EQ(failed.record_id, "site-07");
  ASSERT_FALSE(failed.ok());
  EXPECT_EQ(failed.error->rfind("parse no_hazard_blocks", 0), 0u) << *failed.error;
  std::size_t ok = 0;
  for (const RunResult& r : results) ok += r.ok();
  EXPECT_EQ(ok, 19u);

  // The first alpha answer is the GPT-4o style output.
  EXPECT_EQ(results[0].parsed.hazards.size(), 2u);
  EXPECT_EQ(results[0].parsed.hazards[0].severity, 8);
}

TEST(Harness, ProviderFailureIsIsolated) {
  const Golden g;
  StubSpec spec;
  spec.default_text = canonicalize(*g.records[0].ground_truth);
  spec.rules.push_back(StubRule{read_image_file(g.records[2].image_path).content_hash, {}, {}, "",
                                ProviderErrorKind::kTransientExhausted});
  RunConfig rc;
  rc.models.push_back(ModelRun{"flaky", "flaky", std::make_shared<StubProvider>("flaky", spec), {}, {}});
  rc.prompt = deterministic_prompt(GuidelineSet({{1, "Fires", "Flames."}}, "x"), ResponseTemplate{});
  rc.concurrency = 3;
  const std::vector<DatasetRecord> four(g.records.begin(), g.records.begin() + 4);
  const auto results = run_models(rc, four);
  ASSERT_EQ(results.size(), 4u);
  EXPECT_TRUE(results[0].ok());
  EXPECT_TRUE(results[1].ok());
  ASSERT_FALSE(results[2].ok());
  EXPECT_EQ(results[2].error->rfind("provider transient_exhausted", 0), 0u) << *results[2].error;
  EXPECT_TRUE(results[3].ok());
  EmbeddingConfig ec{std::make_shared<StubProvider>("emb", StubSpec{}), "emb"};
  const EvalTable t = evaluate_run(rc, results, four, ec);
  EXPECT_EQ(t.rows.at(0).n, 3u);
  ASSERT_EQ(t.exclusions.size(), 1u);
  EXPECT_EQ(t.exclusions[0], (Exclusion{"site-03", "flaky", "inference", *results[2].error}));
}

TEST(Harness, SubsetAndSmallConfig) {
  const testing::TempDir dir;
  const Golden g;
  const ProviderRegistry reg(g.config, cache_in(dir, false));
  const RunConfig rc = build_run_config(g.config, reg, resolve_prompt(g.config, reg), {"vlm-beta"});
  ASSERT_EQ(rc.models.size(), 1u);
  const std::vector<DatasetRecord> three(g.records.begin(), g.records.begin() + 3);
  const auto results = run_models(rc, three);
  EXPECT_EQ(results.size(), 3u);
  EXPECT_EQ(reg.stub("alpha")->complete_calls(), 0u);
  EXPECT_THROW(build_run_config(g.config, reg, resolve_prompt(g.config, reg), {"nope"}), ConfigError);
}

TEST(Harness, CachedRerunMakesNoStubCalls) {
  const testing::TempDir dir;
  const Golden g;
  const ProviderRegistry reg(g.config, cache_in(dir, true));
  const RunConfig rc = build_run_config(g.config, reg, resolve_prompt(g.config, reg));
  const EmbeddingConfig ec = build_embedding_config(g.config, reg);
  const auto r1 = run_models(rc, g.records);
  const EvalTable t1 = evaluate_run(rc, r1, g.records, ec);
  EXPECT_GT(reg.stub_calls(), 0u);

  reg.reset_stub_counters();
  const auto r2 = run_models(rc, g.records);
  const EvalTable t2 = evaluate_run(rc, r2, g.records, ec);
  EXPECT_EQ(reg.stub_calls(), 0u);
  EXPECT_EQ(t1, t2);
  ASSERT_EQ(r1.size(), r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) EXPECT_EQ(run_result_to_json(r1[i]), run_result_to_json(r2[i]));
}

TEST(Harness, EvaluationShapeAndExclusions) {
  const testing::TempDir dir;
  const Golden g;
  const ProviderRegistry reg(g.config, cache_in(dir, false));
  const RunConfig rc = build_run_config(g.config, reg, resolve_prompt(g.config, reg));
  const auto results = run_models(rc, g.records);
  const EvalTable t = evaluate_run(rc, results, g.records, build_embedding_config(g.config, reg));
  ASSERT_EQ(t.rows.size(), 4u);
  // Track-major, models in configuration order.
  EXPECT_EQ(t.rows[0].model_id, "vlm-alpha");
  EXPECT_EQ(t.rows[0].track, Track::kHazardDetection);
  EXPECT_EQ(t.rows[1].model_id, "vlm-beta");
  EXPECT_EQ(t.rows[1].track, Track::kHazardDetection);
  EXPECT_EQ(t.rows[2].model_id, "vlm-alpha");
  EXPECT_EQ(t.rows[2].track, Track::kOverall);
  EXPECT_EQ(t.rows[0].n, 10u);
  EXPECT_EQ(t.rows[1].n, 9u);
  EXPECT_EQ(t.rows[3].n, 9u);
  EXPECT_FALSE(t.rows[0].judge_normalized.has_value());
  ASSERT_TRUE(t.rows[2].judge_normalized.has_value());
  for (const ScoreRow& row : t.rows) {
    EXPECT_GE(row.cosine, -1.0);
    EXPECT_LE(row.cosine, 1.0);
    EXPECT_LE(row.bert_f1, 1.0);
    if (row.judge_normalized) {
      EXPECT_GE(*row.judge_normalized, 0.2);
      EXPECT_LE(*row.judge_normalized, 1.0);
      EXPECT_LE(row.judge_n, row.n);
    }
  }
  std::set<std::string> stages;
  bool inference_site07 = false;
  for (const Exclusion& e : t.exclusions) {
    stages.insert(e.stage);
    inference_site07 |= e.stage == "inference" && e.record_id == "site-07" && e.model_id == "vlm-beta";
  }
  EXPECT_TRUE(inference_site07);
  EXPECT_TRUE(stages.count("judge"));
  EXPECT_EQ(t.rows[2].judge_n + std::count_if(t.exclusions.begin(), t.exclusions.end(),
                                              [](const Exclusion& e) {
                                                return e.stage == "judge" && e.model_id == "vlm-alpha";
                                              }),
            10u);
  ASSERT_EQ(t.latency_rows.size(), 2u);
  EXPECT_EQ(t.latency_rows[0].n, 10u);
  EXPECT_EQ(t.latency_rows[1].n, 9u);
  EXPECT_EQ(t.run_fingerprint.size(), 64u);
  EXPECT_EQ(eval_table_from_json(eval_table_to_json(t)), t);
}

TEST(Harness, IdenticalPredictionScoresOne) {
  const Golden g;
  StubSpec vlm;
  vlm.default_text = canonicalize(*g.records[0].ground_truth);
  StubSpec judge;
  judge.default_text = R"({"completeness": 5, "accuracy": 5, "clarity": 5})";
  RunConfig rc;
  rc.models.push_back(ModelRun{"echo", "echo", std::make_shared<StubProvider>("echo", vlm), {}, {}});
  rc.prompt = deterministic_prompt(GuidelineSet({{1, "Fires", "Flames."}}, "x"), ResponseTemplate{});
  rc.judge = JudgeConfig{std::make_shared<StubProvider>("judge", judge), {}, false};
  EmbeddingConfig ec{std::make_shared<StubProvider>("emb", StubSpec{}), "emb"};
  const std::vector<DatasetRecord> one(g.records.begin(), g.records.begin() + 1);
  const EvalTable t = evaluate_run(rc, run_models(rc, one), one, ec);
  ASSERT_EQ(t.rows.size(), 2u);
  for (const ScoreRow& row : t.rows) {
    EXPECT_NEAR(row.cosine, 1.0, 1e-12);
    EXPECT_NEAR(row.bert_f1, 1.0, 1e-12);
  }
  EXPECT_EQ(t.rows[1].judge_normalized, 1.0);
}

TEST(Harness, EvaluationRefusesDrafts) {
  const Golden g;
  auto records = g.records;
  records[4].review_status = ReviewStatus::kDraft;
  RunConfig rc;
  rc.models.push_back(ModelRun{"m", "m", std::make_shared<StubProvider>("m", StubSpec{}), {}, {}});
  rc.prompt = deterministic_prompt(GuidelineSet({{1, "Fires", "Flames."}}, "x"), ResponseTemplate{});
  EmbeddingConfig ec{std::make_shared<StubProvider>("emb", StubSpec{}), "emb"};
  try {
    evaluate_run(rc, {}, records, ec);
    FAIL();
  } catch (const DraftGateError& e) {
    EXPECT_EQ(e.draft_ids(), std::vector<std::string>{"site-05"});
  }
}

TEST(Harness, PercentileAndLatency) {
  EXPECT_EQ(percentile({1, 2, 3}, 0.5), 2.0);
  EXPECT_EQ(percentile({3, 1, 2}, 0.0), 1.0);
  EXPECT_EQ(percentile({3, 1, 2}, 1.0), 3.0);
  EXPECT_NEAR(percentile({1, 2, 3, 4}, 0.95), 3.85, 1e-12);
  EXPECT_EQ(percentile({7}, 0.95), 7.0);
  EXPECT_THROW(percentile({}, 0.5), MetricError);

  std::vector<RunResult> rs;
  for (double l : {1.0, 2.0, 3.0}) {
    RunResult r;
    r.model_id = "GPT-4o";
    r.completion.latency_s = l;
    rs.push_back(r);
  }
  RunResult failed;
  failed.model_id = "GPT-4o";
  failed.completion.latency_s = 100;
  failed.error = "provider auth: x";
  rs.push_back(failed);
  const auto rows = bench_latency(rs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].n, 3u);
  EXPECT_EQ(rows[0].mean_s, 2.0);
  EXPECT_EQ(rows[0].p50_s, 2.0);
  EXPECT_TRUE(rows[0].reference_s.has_value());
}

TEST(Harness, ReferenceLatencyLookup) {
  const std::pair<const char*, double> table[] = {
      {"Gemini 2 flash", 0.94},       {"Gemini 1.5 Pro", 2.94}, {"Gemini 1.5 Flash 8B", 0.86},
      {"GPT-4o", 4.57},               {"GPT-4o mini", 3.18},    {"Llama-3.2-11B-Vision", 8.40},
      {"Intern VL2 8B", 5.30},        {"Intern VL2 4B", 4.80},  {"Intern VL2 2B", 3.41},
      {"Intern VL2 1B", 3.24}};
  for (const auto& [id, seconds] : table) EXPECT_EQ(reference_latency(id), seconds) << id;
  EXPECT_EQ(reference_latency("gpt-4o"), 4.57);
  EXPECT_EQ(reference_latency("gemini-2.0-flash"), 0.94);
  EXPECT_EQ(reference_latency("Llama-3.2-11B-Vision-Instruct"), 8.40);
  EXPECT_FALSE(reference_latency("vlm-alpha").has_value());
}

TEST(Harness, FingerprintIgnoresConcurrencyAndCache) {
  const testing::TempDir dir;
  const Golden g;
  const ProviderRegistry cached(g.config, cache_in(dir, true));
  const ProviderRegistry plain(g.config, cache_in(dir, false));
  RunConfig a = build_run_config(g.config, cached, resolve_prompt(g.config, cached));
  RunConfig b = build_run_config(g.config, plain, resolve_prompt(g.config, plain));
  b.concurrency = 1;
  const EmbeddingConfig ea = build_embedding_config(g.config, cached);
  const EmbeddingConfig eb = build_embedding_config(g.config, plain);
  const std::string fa = run_fingerprint(a, ea, g.records);
  EXPECT_EQ(fa, run_fingerprint(b, eb, g.records));
  b.models[0].params.temperature = 0.7;
  EXPECT_NE(fa, run_fingerprint(b, eb, g.records));
  const std::vector<DatasetRecord> fewer(g.records.begin(), g.records.end() - 1);
  EXPECT_NE(fa, run_fingerprint(a, ea, fewer));
}

TEST(Harness, RunResultJsonRoundTrip) {
  RunResult r;
  r.record_id = "site-01";
  r.model_id = "m";
  r.completion = CompletionResult{"Summary: x", 1.25, TokenUsage{3, 4}, 2};
  r.parsed.summary = "x";
  r.parsed.raw_text = "Summary: x";
  r.issues.push_back(ParseIssue{ParseIssueKind::kNoHazardBlocks, 0, "no hazard blocks found"});
  const RunResult back = run_result_from_json(run_result_to_json(r));
  EXPECT_EQ(run_result_to_json(back), run_result_to_json(r));
  r.error = "provider auth: denied";
  EXPECT_FALSE(run_result_from_json(run_result_to_json(r)).ok());
}

TEST(Harness, BootstrapDraftsMissingGroundTruth) {
  const testing::TempDir dir;
  const Golden g;
  const ProviderRegistry reg(g.config, cache_in(dir, false));
  auto drafts = load_dataset(testing::fixture_dir() / "dataset" / "drafts.jsonl");
  std::vector<DatasetRecord> mixed{g.records[0]};
  mixed.insert(mixed.end(), drafts.begin(), drafts.end());
  const EngineeredPrompt prompt = resolve_prompt(g.config, reg);
  const auto out = bootstrap_ground_truth(mixed, *reg.get("alpha"), prompt, g.config.model("vlm-alpha").params());
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(record_to_json(out[0]), record_to_json(g.records[0]));
  EXPECT_EQ(reg.stub("alpha")->complete_calls(), 3u);
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_EQ(out[i].review_status, ReviewStatus::kDraft);
    EXPECT_EQ(out[i].record_id, drafts[i - 1].record_id);
  }
  std::size_t drafted = 0;
  for (std::size_t i = 1; i < out.size(); ++i) drafted += out[i].ground_truth.has_value();
  EXPECT_GE(drafted, 1u);
  EXPECT_THROW(ensure_evaluable(out), DraftGateError);
}

}  // namespace
}  // namespace hazlens
