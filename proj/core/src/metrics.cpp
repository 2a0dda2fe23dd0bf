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

#include "hazlens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "hazlens/error.hpp"

namespace hazlens {

using json = nlohmann::json;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw MetricError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()));
  }
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw MetricError("embedding vector must have dimension >= 1");
  for (double v : values_) {
    if (!std::isfinite(v)) throw MetricError("embedding vector has a non-finite entry");
  }
}

double EmbeddingVector::norm() const noexcept { return std::sqrt(dot(values_, values_)); }

bool EmbeddingVector::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

EmbeddingVector EmbeddingVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw MetricError("cannot normalize a zero vector");
  std::vector<double> out(values_.begin(), values_.end());
  for (double& v : out) v /= n;
  return EmbeddingVector(std::move(out));
}

TokenEmbeddingSet::TokenEmbeddingSet(std::vector<std::string> tokens,
                                     std::vector<EmbeddingVector> vectors)
    : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw MetricError("token embedding set is empty");
  if (tokens_.size() != vectors.size()) {
    throw MetricError("token/vector count mismatch: " + std::to_string(tokens_.size()) + " vs " +
                      std::to_string(vectors.size()));
  }
  vectors_.reserve(vectors.size());
  for (const EmbeddingVector& v : vectors) {
    if (v.dim() == 0) throw MetricError("token vector has dimension 0");
    if (!vectors_.empty()) require_same_dim(vectors_.front(), v);
    // Vectors already at unit length are kept bit-for-bit, which makes
    // normalization idempotent (cached sets reload identically).
    if (std::abs(v.norm() - 1.0) <= 1e-12) {
      vectors_.push_back(v);
    } else {
      vectors_.push_back(v.normalized());
    }
  }
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  if (a.dim() == 0) throw MetricError("empty embedding vector");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw MetricError("cosine similarity of a zero vector");
  const double c = dot(a.values(), b.values()) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

double token_similarity(const EmbeddingVector& t, const EmbeddingVector& g) {
  require_same_dim(t, g);
  return dot(t.values(), g.values());
}

BertScore bertscore(const TokenEmbeddingSet& candidate, const TokenEmbeddingSet& reference) {
  if (candidate.size() == 0 || reference.size() == 0) {
    throw MetricError("bertscore requires non-empty token sets");
  }
  if (candidate.dim() != reference.dim()) {
    throw MetricError("dimension mismatch: " + std::to_string(candidate.dim()) + " vs " +
                      std::to_string(reference.dim()));
  }
  const auto& cv = candidate.vectors();
  const auto& rv = reference.vectors();
  // One similarity matrix serves both directions.
  std::vector<double> sim(cv.size() * rv.size());
  for (std::size_t i = 0; i < cv.size(); ++i) {
    for (std::size_t j = 0; j < rv.size(); ++j) {
      sim[i * rv.size() + j] = dot(cv[i].values(), rv[j].values());
    }
  }
  double p_sum = 0.0;
  for (std::size_t i = 0; i < cv.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rv.size(); ++j) best = std::max(best, sim[i * rv.size() + j]);
    p_sum += best;
  }
  double r_sum = 0.0;
  for (std::size_t j = 0; j < rv.size(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cv.size(); ++i) best = std::max(best, sim[i * rv.size() + j]);
    r_sum += best;
  }
  BertScore s;
  s.precision = p_sum / static_cast<double>(cv.size());
  s.recall = r_sum / static_cast<double>(rv.size());
  const double denom = s.precision + s.recall;
  s.f1 = denom == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / denom;
  return s;
}

std::string_view to_string(Track track) {
  return track == Track::kHazardDetection ? "hazard_detection" : "overall";
}

Track parse_track(std::string_view name) {
  if (name == "hazard_detection") return Track::kHazardDetection;
  if (name == "overall") return Track::kOverall;
  throw MetricError("unknown track '" + std::string(name) + "'");
}

double stable_mean(std::vector<double> values) {
  if (values.empty()) throw MetricError("mean of an empty list");
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

ScoreRow aggregate(std::span<const SampleScores> samples, std::string model_id, Track track) {
  if (samples.empty()) throw MetricError("cannot aggregate an empty sample list");
  std::vector<double> cos, p, r, f, judge;
  for (const SampleScores& s : samples) {
    cos.push_back(s.cosine);
    p.push_back(s.bert.precision);
    r.push_back(s.bert.recall);
    f.push_back(s.bert.f1);
    if (s.judge_normalized) judge.push_back(*s.judge_normalized);
  }
  ScoreRow row;
  row.model_id = std::move(model_id);
  row.track = track;
  row.n = samples.size();
  row.cosine = stable_mean(std::move(cos));
  row.bert_precision = stable_mean(std::move(p));
  row.bert_recall = stable_mean(std::move(r));
  row.bert_f1 = stable_mean(std::move(f));
  row.judge_n = judge.size();
  if (!judge.empty()) row.judge_normalized = stable_mean(std::move(judge));
  return row;
}

json score_row_to_json(const ScoreRow& row) {
  json j{{"model_id", row.model_id},
         {"track", std::string(to_string(row.track))},
         {"n", row.n},
         {"cosine", row.cosine},
         {"bert_precision", row.bert_precision},
         {"bert_recall", row.bert_recall},
         {"bert_f1", row.bert_f1},
         {"judge_n", row.judge_n}};
  j["judge_normalized"] = row.judge_normalized ? json(*row.judge_normalized) : json(nullptr);
  return j;
}

ScoreRow score_row_from_json(const json& j) {
  ScoreRow row;
  row.model_id = j.at("model_id").get<std::string>();
  row.track = parse_track(j.at("track").get<std::string>());
  row.n = j.at("n").get<std::size_t>();
  row.cosine = j.at("cosine").get<double>();
  row.bert_precision = j.at("bert_precision").get<double>();
  row.bert_recall = j.at("bert_recall").get<double>();
  row.bert_f1 = j.at("bert_f1").get<double>();
  row.judge_n = j.value("judge_n", std::size_t{0});
  if (j.contains("judge_normalized") && !j.at("judge_normalized").is_null()) {
    row.judge_normalized = j.at("judge_normalized").get<double>();
  }
  return row;
}

}  // namespace hazlens
