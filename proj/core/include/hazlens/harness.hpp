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

// Batch execution and evaluation: run every model over every record, score
// predictions against ground truth on both tracks, and summarize latency.

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hazlens/dataset.hpp"
#include "hazlens/judge.hpp"
#include "hazlens/metrics.hpp"
#include "hazlens/prompting.hpp"
#include "hazlens/providers.hpp"
#include "hazlens/reportparse.hpp"

namespace hazlens {

struct ModelRun {
  std::string model_id;       // display name used in reports
  std::string provider_name;  // configuration key, for fingerprints
  std::shared_ptr<Provider> provider;
  GenerationParams params;    // params.model_id is the backend model name
  std::optional<double> reference_latency_s;
};

struct RunConfig {
  std::vector<ModelRun> models;
  EngineeredPrompt prompt;
  int concurrency = 1;
  std::vector<Track> tracks{Track::kHazardDetection, Track::kOverall};
  std::optional<JudgeConfig> judge;
  SeverityScale scale;

  /// Throws ConfigError.
  void validate() const;
};

struct RunResult {
  std::string record_id;
  std::string model_id;
  CompletionResult completion;
  HazardReport parsed;
  std::vector<ParseIssue> issues;
  /// Set when inference or parsing failed; the sample is then excluded.
  std::optional<std::string> error;

  bool ok() const noexcept { return !error.has_value(); }
};

nlohmann::json run_result_to_json(const RunResult& r);
RunResult run_result_from_json(const nlohmann::json& j, SeverityScale scale = {});

/// Calls `fn(i)` for i in [0, n) on at most `concurrency` threads. The first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, int concurrency, const std::function<void(std::size_t)>& fn);

/// One result per (model, record), model-major in configuration order.
/// Provider and parse failures are recorded on the result.
std::vector<RunResult> run_models(const RunConfig& config, std::span<const DatasetRecord> records);

struct EmbeddingConfig {
  std::shared_ptr<Provider> provider;
  std::string provider_name;
  std::string sentence_model = "paraphrase-MiniLM-L12-v2";
  std::string token_model = "roberta-large";
};

struct LatencyRow {
  std::string model_id;
  std::size_t n = 0;
  double mean_s = 0.0;
  double p50_s = 0.0;
  double p95_s = 0.0;
  std::optional<double> reference_s;

  bool operator==(const LatencyRow&) const = default;
};

/// A sample left out of an aggregate, with the reason.
struct Exclusion {
  std::string record_id;
  std::string model_id;
  std::string stage;  // "inference" or "judge"
  std::string reason;

  bool operator==(const Exclusion&) const = default;
};

struct EvalTable {
  std::vector<ScoreRow> rows;
  std::vector<LatencyRow> latency_rows;
  std::string run_fingerprint;
  std::vector<Exclusion> exclusions;

  bool operator==(const EvalTable&) const = default;
};

nlohmann::json eval_table_to_json(const EvalTable& t);
EvalTable eval_table_from_json(const nlohmann::json& j);

/// Linear interpolation between closest ranks. Throws MetricError if empty.
double percentile(std::vector<double> values, double q);

/// Reference per-image latency in seconds for a few well-known models,
/// matched on the id with case and punctuation ignored.
std::optional<double> reference_latency(std::string_view model_id);

/// Per-model mean/p50/p95 over successful results, in order of first
/// appearance.
std::vector<LatencyRow> bench_latency(std::span<const RunResult> results);

/// Digest of everything that determines scores: models, prompt, tracks,
/// judge, embedding models, scale and record ids. Concurrency and caching are
/// deliberately left out.
std::string run_fingerprint(const RunConfig& config, const EmbeddingConfig& embedding,
                            std::span<const DatasetRecord> records);

/// Scores results against approved ground truth. Refuses drafts
/// (DraftGateError). Embedding failures propagate; judge failures become
/// exclusions.
EvalTable evaluate_run(const RunConfig& config, std::span<const RunResult> results,
                       std::span<const DatasetRecord> records, const EmbeddingConfig& embedding);

/// Fills records lacking ground truth with model-drafted reports, all marked
/// draft. Records that already have ground truth pass through unchanged.
/// Failures leave the record empty with a note.
std::vector<DatasetRecord> bootstrap_ground_truth(std::span<const DatasetRecord> records,
                                                  Provider& provider, const EngineeredPrompt& prompt,
                                                  const GenerationParams& params, SeverityScale scale = {},
                                                  int concurrency = 1);

}  // namespace hazlens
