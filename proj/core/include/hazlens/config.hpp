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

// Harness configuration file (JSON) and the provider registry built from it.
// Relative paths in the file resolve against the file's own directory. The
// schema is documented in docs/config.md.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hazlens/harness.hpp"
#include "hazlens/providers.hpp"
#include "hazlens/replay.hpp"
#include "hazlens/stub_provider.hpp"

namespace hazlens {

struct ModelSpec {
  std::string id;
  std::string provider;
  std::string model;
  double temperature = 0.3;
  int max_tokens = 250;
  std::optional<double> reference_latency_s;

  GenerationParams params() const { return GenerationParams{temperature, max_tokens, model}; }
};

struct EmbeddingSpec {
  std::string provider;
  std::string sentence_model = "paraphrase-MiniLM-L12-v2";
  std::string token_model = "roberta-large";
};

struct JudgeSpec {
  std::string provider;
  std::string model;
  double temperature = 0.3;
  int max_tokens = 250;
  bool include_image = false;
};

enum class PromptMode { kDeterministic, kMeta, kFile };

struct PromptSpec {
  PromptMode mode = PromptMode::kDeterministic;
  std::filesystem::path guidelines;
  std::filesystem::path file;  // kFile: EngineeredPrompt JSON
  std::string engineer_provider;
  std::string engineer_model;
  double engineer_temperature = 0.3;
  int engineer_max_tokens = 1024;
};

struct RunSpec {
  int concurrency = 4;
  bool cache = true;
  std::vector<Track> tracks{Track::kHazardDetection, Track::kOverall};
  SeverityScale scale;
};

struct HarnessConfig {
  std::map<std::string, ProviderConfig> providers;
  std::vector<ModelSpec> models;
  std::optional<EmbeddingSpec> embedding;
  std::optional<JudgeSpec> judge;
  PromptSpec prompt;
  RunSpec run;
  std::filesystem::path dataset;
  std::filesystem::path cache_dir = ".cache/providers";
  std::filesystem::path media_dir = "media";
  std::filesystem::path base_dir;

  /// Cross-references: every provider named by a model, the embedding, the
  /// judge or the prompt engineer must exist. Throws ConfigError.
  void validate() const;
  const ModelSpec& model(const std::string& id) const;
};

HarnessConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
HarnessConfig load_config(const std::filesystem::path& path);

struct RegistryOptions {
  /// Live providers become replay-only: cache hits are served, misses fail.
  bool offline = false;
  /// Wrap every provider in the record/replay cache.
  bool cache = true;
  /// Overrides HarnessConfig::cache_dir.
  std::optional<std::filesystem::path> cache_dir;
  ProviderDeps deps;
};

/// Owns one Provider per configured name.
class ProviderRegistry {
 public:
  ProviderRegistry(const HarnessConfig& config, RegistryOptions options = {});

  /// Throws ConfigError on an unknown name.
  std::shared_ptr<Provider> get(const std::string& name) const;
  /// The underlying stub, for call counting; null for other kinds.
  StubProvider* stub(const std::string& name) const;
  /// Sum of call counters over every stub.
  std::size_t stub_calls() const;
  void reset_stub_counters() const;
  const std::shared_ptr<ReplayStore>& store() const noexcept { return store_; }

 private:
  std::map<std::string, std::shared_ptr<Provider>> providers_;
  std::map<std::string, std::shared_ptr<StubProvider>> stubs_;
  std::shared_ptr<ReplayStore> store_;
};

/// Produces the inference prompt the config asks for. The meta mode calls
/// the engineer provider (through the registry, so it is cached too).
EngineeredPrompt resolve_prompt(const HarnessConfig& config, const ProviderRegistry& registry);

/// Restricts to `model_ids` when non-empty.
RunConfig build_run_config(const HarnessConfig& config, const ProviderRegistry& registry, EngineeredPrompt prompt,
                           const std::vector<std::string>& model_ids = {});

/// Throws ConfigError when the config has no embedding section.
EmbeddingConfig build_embedding_config(const HarnessConfig& config, const ProviderRegistry& registry);

}  // namespace hazlens
