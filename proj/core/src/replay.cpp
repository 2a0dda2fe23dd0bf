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

#include "hazlens/replay.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include "hazlens/encoding.hpp"

namespace hazlens {

using json = nlohmann::json;

json completion_request(std::string_view model_id, std::string_view prompt, std::string_view image_hash,
                        double temperature, int max_tokens) {
  return json{{"op", "complete"},
              {"model_id", std::string(model_id)},
              {"prompt", std::string(prompt)},
              {"image_sha256", std::string(image_hash)},
              {"temperature", temperature},
              {"max_tokens", max_tokens}};
}

json sentence_embedding_request(std::string_view model_id, std::string_view text) {
  return json{{"op", "embed_sentence"}, {"model_id", std::string(model_id)}, {"text", std::string(text)}};
}

json token_embedding_request(std::string_view model_id, std::string_view text) {
  return json{{"op", "embed_tokens"}, {"model_id", std::string(model_id)}, {"text", std::string(text)}};
}

std::string request_digest(const json& request) {
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  return sha256_hex(request.dump());
}

ReplayStore::ReplayStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<json> ReplayStore::lookup(const json& request) const {
  const auto path = dir_ / (request_digest(request) + ".json");
  std::lock_guard lock(mu_);
  std::ifstream in(path);
  if (!in) {
    ++misses_;
    return std::nullopt;
  }
  json entry = json::parse(in, nullptr, false);
  if (entry.is_discarded() || !entry.contains("response") || entry.value("request", json()) != request) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return entry.at("response");
}

void ReplayStore::record(const json& request, const json& response) {
  static std::atomic<unsigned> counter{0};
  const std::string digest = request_digest(request);
  std::lock_guard lock(mu_);
  std::filesystem::create_directories(dir_);
  const auto final_path = dir_ / (digest + ".json");
  const auto tmp = dir_ / (digest + ".tmp" + std::to_string(counter++));
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write replay entry " + tmp.string());
    out << json{{"request", request}, {"response", response}}.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, final_path);
}

std::size_t ReplayStore::hits() const noexcept {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t ReplayStore::misses() const noexcept {
  std::lock_guard lock(mu_);
  return misses_;
}

CachingProvider::CachingProvider(std::shared_ptr<Provider> inner, std::shared_ptr<ReplayStore> store,
                                 std::string name)
    : inner_(std::move(inner)), store_(std::move(store)), name_(std::move(name)) {
  if (!store_) throw ConfigError("caching provider needs a replay store");
  if (name_.empty()) name_ = inner_ ? inner_->name() : "replay";
}

void CachingProvider::miss(const std::string& what) const {
  throw ProviderError(ProviderErrorKind::kCacheMiss,
                      "replay store " + store_->dir().string() + " has no entry for " + what);
}

CompletionResult CachingProvider::do_complete(std::string_view prompt, const ImageAttachment* image,
                                              const GenerationParams& params) {
  const json request = completion_request(params.model_id, prompt, image ? image->content_hash : "",
                                          params.temperature, params.max_tokens);
  if (auto hit = store_->lookup(request)) return completion_from_json(*hit);
  if (!inner_) miss("completion with model '" + params.model_id + "'");
  CompletionResult r = inner_->complete(prompt, image, params);
  store_->record(request, completion_to_json(r));
  return r;
}

std::vector<EmbeddingVector> CachingProvider::do_embed_sentence(std::span<const std::string> texts,
                                                                std::string_view model_id) {
  std::vector<std::optional<EmbeddingVector>> found(texts.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> missing_at;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (auto hit = store_->lookup(sentence_embedding_request(model_id, texts[i]))) {
      found[i] = EmbeddingVector(hit->at("vector").get<std::vector<double>>());
    } else {
      missing.push_back(texts[i]);
      missing_at.push_back(i);
    }
  }
  if (!missing.empty()) {
    if (!inner_) miss("sentence embedding with model '" + std::string(model_id) + "'");
    std::vector<EmbeddingVector> fresh = inner_->embed_sentence(missing, model_id);
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      const auto v = fresh[k].values();
      store_->record(sentence_embedding_request(model_id, missing[k]),
                     json{{"vector", std::vector<double>(v.begin(), v.end())}});
      found[missing_at[k]] = std::move(fresh[k]);
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(found.size());
  for (auto& v : found) out.push_back(std::move(*v));
  return out;
}

TokenEmbeddingSet CachingProvider::do_embed_tokens(std::string_view text, std::string_view model_id) {
  const json request = token_embedding_request(model_id, text);
  if (auto hit = store_->lookup(request)) {
    std::vector<EmbeddingVector> vectors;
    for (const json& v : hit->at("vectors")) vectors.emplace_back(v.get<std::vector<double>>());
    return TokenEmbeddingSet(hit->at("tokens").get<std::vector<std::string>>(), std::move(vectors));
  }
  if (!inner_) miss("token embedding with model '" + std::string(model_id) + "'");
  TokenEmbeddingSet set = inner_->embed_tokens(text, model_id);
  json vectors = json::array();
  for (const EmbeddingVector& v : set.vectors()) {
    vectors.push_back(std::vector<double>(v.values().begin(), v.values().end()));
  }
  store_->record(request, json{{"tokens", set.tokens()}, {"vectors", std::move(vectors)}});
  return set;
}

}  // namespace hazlens
