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

#include "hazlens/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hazlens/encoding.hpp"

namespace hazlens {

using json = nlohmann::json;

void RunConfig::validate() const {
  if (models.empty()) throw ConfigError("run needs at least one model");
  if (concurrency < 1) throw ConfigError("concurrency must be at least 1");
  if (tracks.empty()) throw ConfigError("run needs at least one track");
  if (is_blank(prompt.text)) throw ConfigError("run prompt is empty");
  for (const ModelRun& m : models) {
    if (is_blank(m.model_id)) throw ConfigError("model id is blank");
    if (!m.provider) throw ConfigError("model " + m.model_id + " has no provider");
    m.params.validate();
  }
  if (judge && !judge->provider) throw ConfigError("judge has no provider");
}

json run_result_to_json(const RunResult& r) {
  json issues = json::array();
  for (const ParseIssue& i : r.issues) issues.push_back(issue_to_json(i));
  json j{{"record_id", r.record_id},
         {"model_id", r.model_id},
         {"completion", completion_to_json(r.completion)},
         {"parsed", r.ok() ? report_to_json(r.parsed) : json(nullptr)},
         {"issues", std::move(issues)}};
  j["error"] = r.error ? json(*r.error) : json(nullptr);
  return j;
}

RunResult run_result_from_json(const json& j, SeverityScale scale) {
  RunResult r;
  r.record_id = j.at("record_id").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.completion = completion_from_json(j.at("completion"));
  if (j.contains("error") && !j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  if (r.ok()) r.parsed = report_from_json(j.at("parsed"), scale);
  for (const json& i : j.value("issues", json::array())) r.issues.push_back(issue_from_json(i));
  return r;
}

void parallel_for(std::size_t n, int concurrency, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, concurrency)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<RunResult> run_models(const RunConfig& config, std::span<const DatasetRecord> records) {
  config.validate();
  if (records.empty()) throw DatasetError("run needs at least one record");

  std::vector<std::optional<ImageAttachment>> images(records.size());
  std::vector<std::string> image_errors(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      images[i] = read_image_file(records[i].image_path);
    } catch (const Error& e) {
      image_errors[i] = e.what();
    }
  }

  const std::size_t n_rec = records.size();
  std::vector<RunResult> results(config.models.size() * n_rec);
  parallel_for(results.size(), config.concurrency, [&](std::size_t slot) {
    const ModelRun& model = config.models[slot / n_rec];
    const std::size_t ri = slot % n_rec;
    RunResult& out = results[slot];
    out.record_id = records[ri].record_id;
    out.model_id = model.model_id;
    if (!images[ri]) {
      out.error = "image: " + image_errors[ri];
      return;
    }
    try {
      out.completion = model.provider->complete(config.prompt.text, &*images[ri], model.params);
    } catch (const ProviderError& e) {
      out.error = "provider " + std::string(to_string(e.kind())) + ": " + e.what();
      spdlog::warn("{} on {}: {}", model.model_id, out.record_id, *out.error);
      return;
    }
    try {
      ParsedReport p = parse_report(out.completion.text, config.scale);
      out.parsed = std::move(p.report);
      out.issues = std::move(p.issues);
    } catch (const ReportParseError& e) {
      out.error = "parse " + std::string(to_string(e.kind())) + ": " + e.what();
    }
  });
  return results;
}

json eval_table_to_json(const EvalTable& t) {
  json rows = json::array();
  for (const ScoreRow& r : t.rows) rows.push_back(score_row_to_json(r));
  json lat = json::array();
  for (const LatencyRow& l : t.latency_rows) {
    lat.push_back({{"model_id", l.model_id},
                   {"n", l.n},
                   {"mean_s", l.mean_s},
                   {"p50_s", l.p50_s},
                   {"p95_s", l.p95_s},
                   {"reference_s", l.reference_s ? json(*l.reference_s) : json(nullptr)}});
  }
  json ex = json::array();
  for (const Exclusion& e : t.exclusions) {
    ex.push_back({{"record_id", e.record_id}, {"model_id", e.model_id}, {"stage", e.stage}, {"reason", e.reason}});
  }
  return json{{"run_fingerprint", t.run_fingerprint},
              {"rows", std::move(rows)},
              {"latency", std::move(lat)},
              {"exclusions", std::move(ex)}};
}

EvalTable eval_table_from_json(const json& j) {
  EvalTable t;
  try {
    t.run_fingerprint = j.at("run_fingerprint").get<std::string>();
    for (const json& r : j.at("rows")) t.rows.push_back(score_row_from_json(r));
    for (const json& l : j.at("latency")) {
      LatencyRow row;
      row.model_id = l.at("model_id").get<std::string>();
      row.n = l.at("n").get<std::size_t>();
      row.mean_s = l.at("mean_s").get<double>();
      row.p50_s = l.at("p50_s").get<double>();
      row.p95_s = l.at("p95_s").get<double>();
      if (!l.at("reference_s").is_null()) row.reference_s = l.at("reference_s").get<double>();
      t.latency_rows.push_back(std::move(row));
    }
    for (const json& e : j.at("exclusions")) {
      t.exclusions.push_back({e.at("record_id").get<std::string>(), e.at("model_id").get<std::string>(),
                              e.at("stage").get<std::string>(), e.at("reason").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ReportError(std::string("malformed evaluation table: ") + e.what());
  }
  return t;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw MetricError("percentile of an empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw MetricError("percentile rank must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

namespace {

std::string normalize_model_id(std::string_view id) {
  std::string out;
  for (char c : id) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::optional<double> reference_latency(std::string_view model_id) {
  static const std::map<std::string, double> kReference = {
      {"gemini2flash", 0.94},     {"gemini20flash", 0.94},     {"gemini15pro", 2.94},
      {"gemini15flash8b", 0.86},  {"gpt4o", 4.57},             {"gpt4omini", 3.18},
      {"llama3211bvision", 8.40}, {"llama3211bvisioninstruct", 8.40},
      {"internvl28b", 5.30},      {"internvl24b", 4.80},       {"internvl22b", 3.41},
      {"internvl21b", 3.24},
  };
  const auto it = kReference.find(normalize_model_id(model_id));
  if (it == kReference.end()) return std::nullopt;
  return it->second;
}

std::vector<LatencyRow> bench_latency(std::span<const RunResult> results) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_model;
  for (const RunResult& r : results) {
    if (!r.ok()) continue;
    auto [it, inserted] = by_model.try_emplace(r.model_id);
    if (inserted) order.push_back(r.model_id);
    it->second.push_back(r.completion.latency_s);
  }
  std::vector<LatencyRow> rows;
  for (const std::string& id : order) {
    const std::vector<double>& v = by_model.at(id);
    rows.push_back(LatencyRow{id, v.size(), stable_mean(v), percentile(v, 0.5), percentile(v, 0.95),
                              reference_latency(id)});
  }
  return rows;
}

std::string run_fingerprint(const RunConfig& config, const EmbeddingConfig& embedding,
                            std::span<const DatasetRecord> records) {
  json models = json::array();
  for (const ModelRun& m : config.models) {
    models.push_back({{"id", m.model_id},
                      {"provider", m.provider_name},
                      {"model", m.params.model_id},
                      {"temperature", m.params.temperature},
                      {"max_tokens", m.params.max_tokens}});
  }
  json tracks = json::array();
  for (Track t : config.tracks) tracks.push_back(std::string(to_string(t)));
  json judge = nullptr;
  if (config.judge) {
    judge = {{"provider", config.judge->provider ? config.judge->provider->name() : std::string()},
             {"model", config.judge->params.model_id},
             {"temperature", config.judge->params.temperature},
             {"max_tokens", config.judge->params.max_tokens},
             {"include_image", config.judge->include_image}};
  }
  json ids = json::array();
  for (const DatasetRecord& r : records) ids.push_back(r.record_id);
  const json doc{{"models", std::move(models)},
                 {"prompt", {{"id", config.prompt.id()},
                             {"guideline_fingerprint", config.prompt.guideline_fingerprint},
                             {"template_fingerprint", config.prompt.template_fingerprint}}},
                 {"tracks", std::move(tracks)},
                 {"judge", std::move(judge)},
                 {"embedding", {{"provider", embedding.provider_name},
                                {"sentence_model", embedding.sentence_model},
                                {"token_model", embedding.token_model}}},
                 {"scale", {config.scale.low, config.scale.high}},
                 {"records", std::move(ids)}};
  return sha256_hex(doc.dump());
}

namespace {

std::string track_text(Track track, const HazardReport& report) {
  return track == Track::kHazardDetection ? hazard_slice(report) : canonicalize(report);
}

// Distinct strings in first-seen order.
class TextPool {
 public:
  std::size_t add(const std::string& s) {
    auto [it, inserted] = index_.try_emplace(s, texts_.size());
    if (inserted) texts_.push_back(s);
    return it->second;
  }
  const std::vector<std::string>& texts() const { return texts_; }

 private:
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> texts_;
};

constexpr std::size_t kSentenceBatch = 32;

}  // namespace

EvalTable evaluate_run(const RunConfig& config, std::span<const RunResult> results,
                       std::span<const DatasetRecord> records, const EmbeddingConfig& embedding) {
  ensure_evaluable(records);
  if (!embedding.provider) throw ConfigError("evaluation needs an embedding provider");

  std::map<std::string, const DatasetRecord*> by_id;
  for (const DatasetRecord& r : records) by_id.emplace(r.record_id, &r);
  for (const RunResult& r : results) {
    if (!by_id.count(r.record_id)) throw DatasetError("result refers to unknown record " + r.record_id);
  }

  EvalTable table;
  table.run_fingerprint = run_fingerprint(config, embedding, records);

  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].ok()) {
      ok.push_back(i);
    } else {
      table.exclusions.push_back({results[i].record_id, results[i].model_id, "inference", *results[i].error});
    }
  }

  // Per track, per ok-result: indices into the text pool for (pred, gt).
  TextPool pool;
  std::map<Track, std::vector<std::pair<std::size_t, std::size_t>>> pairs;
  for (Track track : config.tracks) {
    auto& v = pairs[track];
    for (std::size_t i : ok) {
      const HazardReport& gt = *by_id.at(results[i].record_id)->ground_truth;
      v.emplace_back(pool.add(track_text(track, results[i].parsed)), pool.add(track_text(track, gt)));
    }
  }

  const std::vector<std::string>& texts = pool.texts();
  std::vector<EmbeddingVector> sentence(texts.size());
  std::vector<TokenEmbeddingSet> tokens(texts.size());
  const std::size_t batches = (texts.size() + kSentenceBatch - 1) / kSentenceBatch;
  parallel_for(batches, config.concurrency, [&](std::size_t b) {
    const std::size_t lo = b * kSentenceBatch;
    const std::size_t hi = std::min(texts.size(), lo + kSentenceBatch);
    std::vector<EmbeddingVector> out =
        embedding.provider->embed_sentence(std::span(texts).subspan(lo, hi - lo), embedding.sentence_model);
    std::move(out.begin(), out.end(), sentence.begin() + static_cast<std::ptrdiff_t>(lo));
  });
  parallel_for(texts.size(), config.concurrency, [&](std::size_t i) {
    tokens[i] = embedding.provider->embed_tokens(texts[i], embedding.token_model);
  });

  std::vector<std::optional<double>> judged(ok.size());
  const bool judging = config.judge.has_value() &&
                       std::find(config.tracks.begin(), config.tracks.end(), Track::kOverall) != config.tracks.end();
  if (judging) {
    std::vector<std::string> failures(ok.size());
    parallel_for(ok.size(), config.concurrency, [&](std::size_t k) {
      const RunResult& r = results[ok[k]];
      const DatasetRecord& rec = *by_id.at(r.record_id);
      try {
        std::optional<ImageAttachment> image;
        if (config.judge->include_image) image = read_image_file(rec.image_path);
        const JudgeScores s = judge_sample(*config.judge, canonicalize(r.parsed), canonicalize(*rec.ground_truth),
                                           image ? &*image : nullptr);
        judged[k] = normalized_score(s);
      } catch (const Error& e) {
        failures[k] = e.what();
      }
    });
    for (std::size_t k = 0; k < ok.size(); ++k) {
      if (!judged[k]) table.exclusions.push_back({results[ok[k]].record_id, results[ok[k]].model_id, "judge", failures[k]});
    }
  }

  std::vector<std::string> model_order;
  for (const ModelRun& m : config.models) model_order.push_back(m.model_id);
  for (const RunResult& r : results) {
    if (std::find(model_order.begin(), model_order.end(), r.model_id) == model_order.end()) {
      model_order.push_back(r.model_id);
    }
  }

  for (Track track : config.tracks) {
    std::map<std::string, std::vector<SampleScores>> per_model;
    const auto& v = pairs.at(track);
    for (std::size_t k = 0; k < ok.size(); ++k) {
      const auto [p, g] = v[k];
      SampleScores s;
      s.cosine = cosine_similarity(sentence[p], sentence[g]);
      s.bert = bertscore(tokens[p], tokens[g]);
      if (track == Track::kOverall) s.judge_normalized = judged[k];
      per_model[results[ok[k]].model_id].push_back(s);
    }
    for (const std::string& id : model_order) {
      const auto it = per_model.find(id);
      if (it != per_model.end()) table.rows.push_back(aggregate(it->second, id, track));
    }
  }

  table.latency_rows = bench_latency(results);
  for (LatencyRow& row : table.latency_rows) {
    for (const ModelRun& m : config.models) {
      if (m.model_id == row.model_id && m.reference_latency_s) row.reference_s = m.reference_latency_s;
    }
  }
  return table;
}

std::vector<DatasetRecord> bootstrap_ground_truth(std::span<const DatasetRecord> records, Provider& provider,
                                                  const EngineeredPrompt& prompt, const GenerationParams& params,
                                                  SeverityScale scale, int concurrency) {
  std::vector<DatasetRecord> out(records.begin(), records.end());
  parallel_for(out.size(), concurrency, [&](std::size_t i) {
    DatasetRecord& rec = out[i];
    if (rec.ground_truth) return;
    rec.review_status = ReviewStatus::kDraft;
    try {
      const ImageAttachment image = read_image_file(rec.image_path);
      const CompletionResult c = provider.complete(prompt.text, &image, params);
      ParsedReport parsed = parse_report(c.text, scale);
      for (const ParseIssue& issue : parsed.issues) {
        rec.notes.push_back("bootstrap " + std::string(to_string(issue.kind)) + ": " + issue.message);
      }
      rec.ground_truth = std::move(parsed.report);
    } catch (const Error& e) {
      rec.notes.push_back(std::string("bootstrap failed: ") + e.what());
    }
  });
  return out;
}

}  // namespace hazlens
