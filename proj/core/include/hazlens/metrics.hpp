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

// Text-similarity metrics over embeddings: sentence-level cosine similarity
// and BERTScore-style greedy token matching (no IDF weighting, no baseline
// rescaling), plus per-model aggregation.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace hazlens {

/// Dense embedding, d >= 1, finite entries.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  /// Throws MetricError when empty or non-finite.
  explicit EmbeddingVector(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t dim() const noexcept { return values_.size(); }
  double norm() const noexcept;
  bool is_zero() const noexcept;
  /// Unit-length copy; throws MetricError on the zero vector.
  EmbeddingVector normalized() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Tokens with one unit-normalized vector each. Construction normalizes.
class TokenEmbeddingSet {
 public:
  TokenEmbeddingSet() = default;
  /// Throws MetricError on empty input, count mismatch, mixed dimensions or a
  /// zero vector.
  TokenEmbeddingSet(std::vector<std::string> tokens, std::vector<EmbeddingVector> vectors);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<EmbeddingVector>& vectors() const noexcept { return vectors_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t dim() const noexcept { return vectors_.empty() ? 0 : vectors_.front().dim(); }

  bool operator==(const TokenEmbeddingSet&) const = default;

 private:
  std::vector<std::string> tokens_;
  std::vector<EmbeddingVector> vectors_;
};

/// dot(a, b) / (|a| |b|), clamped to [-1, 1].
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Dot product of two unit vectors.
double token_similarity(const EmbeddingVector& t, const EmbeddingVector& g);

struct BertScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision: mean over candidate tokens of the best match in the reference.
/// Recall: mean over reference tokens of the best match in the candidate.
/// F1: harmonic mean, 0 when precision + recall == 0.
BertScore bertscore(const TokenEmbeddingSet& candidate, const TokenEmbeddingSet& reference);

enum class Track { kHazardDetection, kOverall };

std::string_view to_string(Track track);
Track parse_track(std::string_view name);

struct SampleScores {
  double cosine = 0.0;
  BertScore bert;
  std::optional<double> judge_normalized;
};

struct ScoreRow {
  std::string model_id;
  Track track = Track::kOverall;
  double cosine = 0.0;
  double bert_precision = 0.0;
  double bert_recall = 0.0;
  double bert_f1 = 0.0;
  std::optional<double> judge_normalized;
  std::size_t n = 0;
  std::size_t judge_n = 0;

  bool operator==(const ScoreRow&) const = default;
};

/// Arithmetic means per metric. Summation runs over sorted values so the
/// result is bit-identical for any permutation of `samples`. Throws
/// MetricError on an empty list.
ScoreRow aggregate(std::span<const SampleScores> samples, std::string model_id, Track track);

/// Order-independent mean (sorted summation). Throws MetricError if empty.
double stable_mean(std::vector<double> values);

nlohmann::json score_row_to_json(const ScoreRow& row);
ScoreRow score_row_from_json(const nlohmann::json& j);

}  // namespace hazlens
