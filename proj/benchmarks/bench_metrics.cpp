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

#include <fstream>
#include <random>
#include <sstream>

#include <benchmark/benchmark.h>

#include "hazlens/judge.hpp"
#include "hazlens/metrics.hpp"
#include "hazlens/reportparse.hpp"

namespace hazlens {
namespace {

std::vector<double> random_values(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(d);
  for (double& x : v) x = n(rng);
  return v;
}

TokenEmbeddingSet random_tokens(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::vector<std::string> tokens;
  std::vector<EmbeddingVector> vectors;
  for (std::size_t i = 0; i < n; ++i) {
    tokens.push_back("t" + std::to_string(i));
    vectors.emplace_back(random_values(rng, d));
  }
  return TokenEmbeddingSet(std::move(tokens), std::move(vectors));
}

void BM_Cosine(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto d = static_cast<std::size_t>(state.range(0));
  const EmbeddingVector a(random_values(rng, d)), b(random_values(rng, d));
  for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity(a, b));
}
BENCHMARK(BM_Cosine)->Arg(384)->Arg(1024);

// Token counts in the range of a full canonical report, at roberta-large width.
void BM_BertScore(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const TokenEmbeddingSet cand = random_tokens(rng, n, 1024), ref = random_tokens(rng, n, 1024);
  for (auto _ : state) benchmark::DoNotOptimize(bertscore(cand, ref));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BertScore)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNSquared);

void BM_ParseReport(benchmark::State& state) {
  std::ifstream in(std::string(HAZLENS_FIXTURE_DIR) + "sample_outputs/llama32_11b_vision_prediction.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  for (auto _ : state) benchmark::DoNotOptimize(parse_report(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseReport);

void BM_Canonicalize(benchmark::State& state) {
  std::ifstream in(std::string(HAZLENS_FIXTURE_DIR) + "sample_outputs/gpt4o_prediction.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  const HazardReport report = parse_report(ss.str()).report;
  for (auto _ : state) benchmark::DoNotOptimize(canonicalize(report));
}
BENCHMARK(BM_Canonicalize);

void BM_ParseJudgeOutput(benchmark::State& state) {
  const std::string text = "Scores follow.\n```json\n{\"completeness\": 4, \"accuracy\": 5, \"clarity\": 4}\n```";
  for (auto _ : state) benchmark::DoNotOptimize(parse_judge_output(text));
}
BENCHMARK(BM_ParseJudgeOutput);

}  // namespace
}  // namespace hazlens
BENCHMARK_MAIN();
