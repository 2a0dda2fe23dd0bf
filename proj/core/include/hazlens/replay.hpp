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

// Content-addressed record/replay store for provider responses.
//
// Layout: <dir>/<digest>.json, each holding
//   {"request": {...digest inputs...}, "response": {...}}
// where the digest is SHA-256 over the canonical JSON of the request.

#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "hazlens/providers.hpp"

namespace hazlens {

/// Request description for a completion; `digest()` is the cache key.
/// Two requests with equal fields always share one entry.
nlohmann::json completion_request(std::string_view model_id, std::string_view prompt,
                                  std::string_view image_hash, double temperature, int max_tokens);
nlohmann::json sentence_embedding_request(std::string_view model_id, std::string_view text);
nlohmann::json token_embedding_request(std::string_view model_id, std::string_view text);
std::string request_digest(const nlohmann::json& request);

class ReplayStore {
 public:
  explicit ReplayStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }

  /// The stored response for `request`, if any.
  std::optional<nlohmann::json> lookup(const nlohmann::json& request) const;
  /// Writes atomically (temp file + rename).
  void record(const nlohmann::json& request, const nlohmann::json& response);

  std::size_t hits() const noexcept;
  std::size_t misses() const noexcept;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

/// Serves recorded responses; on a miss, forwards to `inner` and records the
/// answer. With a null `inner` (replay kind) a miss is a kCacheMiss error and
/// no network I/O ever happens.
class CachingProvider final : public Provider {
 public:
  CachingProvider(std::shared_ptr<Provider> inner, std::shared_ptr<ReplayStore> store,
                  std::string name = {});

  const std::string& name() const override { return name_; }
  ProviderKind kind() const override { return inner_ ? inner_->kind() : ProviderKind::kReplay; }
  const std::shared_ptr<Provider>& inner() const noexcept { return inner_; }

 protected:
  CompletionResult do_complete(std::string_view prompt, const ImageAttachment* image,
                               const GenerationParams& params) override;
  std::vector<EmbeddingVector> do_embed_sentence(std::span<const std::string> texts,
                                                 std::string_view model_id) override;
  TokenEmbeddingSet do_embed_tokens(std::string_view text, std::string_view model_id) override;

 private:
  [[noreturn]] void miss(const std::string& what) const;

  std::shared_ptr<Provider> inner_;
  std::shared_ptr<ReplayStore> store_;
  std::string name_;
};

}  // namespace hazlens
