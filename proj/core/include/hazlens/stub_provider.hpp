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

#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hazlens/providers.hpp"

namespace hazlens {

/// One canned completion. Every condition that is set must match; the first
/// matching rule wins.
struct StubRule {
  std::optional<std::string> image_sha256;
  std::optional<std::string> prompt_sha256;
  std::optional<std::string> prompt_contains;
  std::string text;
  /// When set, the call fails with this error kind instead of answering.
  std::optional<ProviderErrorKind> fail;
};

struct StubSpec {
  std::vector<StubRule> rules;
  std::optional<std::string> default_text;
  /// Reported latency. Stub calls are simulated, so a fixed value keeps
  /// reports reproducible.
  double latency_s = 0.0;
  /// Adds up to this much, derived from a hash of the request.
  double latency_jitter_s = 0.0;
  std::size_t embedding_dim = 32;
  /// Explicit per-word vectors; other words get a hashed vector.
  std::map<std::string, std::vector<double>> word_vectors;
  /// Exact-text sentence vectors; other texts average their word vectors.
  std::map<std::string, std::vector<double>> sentence_vectors;
};

StubSpec stub_spec_from_json(const nlohmann::json& j);
StubSpec load_stub_spec(const std::filesystem::path& path);

/// Lowercased alphanumeric words; bytes >= 0x80 count as word characters.
std::vector<std::string> stub_tokenize(std::string_view text);

/// Deterministic, network-free provider for tests and offline runs.
class StubProvider final : public Provider {
 public:
  StubProvider(std::string name, StubSpec spec);

  const std::string& name() const override { return name_; }
  ProviderKind kind() const override { return ProviderKind::kStub; }

  std::size_t complete_calls() const noexcept { return complete_calls_.load(); }
  std::size_t embed_calls() const noexcept { return embed_calls_.load(); }
  std::size_t total_calls() const noexcept { return complete_calls() + embed_calls(); }
  void reset_counters() noexcept;

  /// Vector used for a single word (explicit or hashed, not normalized).
  std::vector<double> word_vector(const std::string& word) const;

 protected:
  CompletionResult do_complete(std::string_view prompt, const ImageAttachment* image,
                               const GenerationParams& params) override;
  std::vector<EmbeddingVector> do_embed_sentence(std::span<const std::string> texts,
                                                 std::string_view model_id) override;
  TokenEmbeddingSet do_embed_tokens(std::string_view text, std::string_view model_id) override;

 private:
  std::string name_;
  StubSpec spec_;
  std::atomic<std::size_t> complete_calls_{0};
  std::atomic<std::size_t> embed_calls_{0};
};

}  // namespace hazlens
