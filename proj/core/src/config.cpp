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

#include "hazlens/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hazlens/encoding.hpp"
#include "hazlens/guidelines.hpp"

namespace hazlens {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::chrono::milliseconds seconds_to_ms(double s, const std::string& what) {
  if (!std::isfinite(s) || s < 0) throw ConfigError(what + " must be a non-negative number of seconds");
  return std::chrono::milliseconds(static_cast<long long>(std::llround(s * 1000.0)));
}

ProviderConfig provider_from_json(const std::string& name, const json& j, const fs::path& base) {
  ProviderConfig c;
  c.name = name;
  c.kind = parse_provider_kind(j.at("kind").get<std::string>());
  c.base_url = j.value("base_url", std::string{});
  c.credential_ref = j.value("credential_ref", std::string{});
  if (j.contains("timeout_s")) c.timeout = seconds_to_ms(j.at("timeout_s").get<double>(), name + ".timeout_s");
  if (j.contains("retry")) {
    const json& r = j.at("retry");
    c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
    if (r.contains("base_backoff_s")) {
      c.retry.base_backoff = seconds_to_ms(r.at("base_backoff_s").get<double>(), name + ".retry.base_backoff_s");
    }
  }
  c.rate_limit_rpm = j.value("rate_limit_rpm", c.rate_limit_rpm);
  c.stub_file = resolve(base, j.value("stub_file", std::string{}));
  c.cache_dir = resolve(base, j.value("cache_dir", std::string{}));
  if (c.kind == ProviderKind::kStub && c.stub_file.empty()) {
    throw ConfigError("provider '" + name + "': stub kind needs stub_file");
  }
  c.validate();
  return c;
}

SeverityScale scale_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("severity_scale must be [low, high]");
  SeverityScale s{j[0].get<int>(), j[1].get<int>()};
  if (s.low >= s.high) throw ConfigError("severity_scale low must be below high");
  return s;
}

PromptMode parse_prompt_mode(const std::string& s) {
  if (s == "deterministic") return PromptMode::kDeterministic;
  if (s == "meta") return PromptMode::kMeta;
  if (s == "file") return PromptMode::kFile;
  throw ConfigError("unknown prompt mode '" + s + "'");
}

}  // namespace

void HarnessConfig::validate() const {
  auto need = [&](const std::string& name, const std::string& who) {
    if (!providers.count(name)) throw ConfigError(who + " refers to unknown provider '" + name + "'");
  };
  std::map<std::string, int> seen;
  for (const ModelSpec& m : models) {
    if (is_blank(m.id)) throw ConfigError("model id is blank");
    if (seen[m.id]++) throw ConfigError("duplicate model id '" + m.id + "'");
    need(m.provider, "model '" + m.id + "'");
    m.params().validate();
  }
  if (embedding) need(embedding->provider, "embedding");
  if (judge) {
    need(judge->provider, "judge");
    GenerationParams{judge->temperature, judge->max_tokens, judge->model}.validate();
  }
  if (prompt.mode == PromptMode::kMeta) need(prompt.engineer_provider, "prompt engineer");
  if (prompt.mode == PromptMode::kFile && prompt.file.empty()) throw ConfigError("prompt mode 'file' needs prompt.file");
  if (prompt.mode != PromptMode::kFile && prompt.guidelines.empty()) {
    throw ConfigError("prompt.guidelines is required");
  }
  if (run.concurrency < 1) throw ConfigError("run.concurrency must be at least 1");
  if (run.tracks.empty()) throw ConfigError("run.tracks must not be empty");
}

const ModelSpec& HarnessConfig::model(const std::string& id) const {
  for (const ModelSpec& m : models) {
    if (m.id == id) return m;
  }
  throw ConfigError("unknown model '" + id + "'");
}

HarnessConfig config_from_json(const json& j, const fs::path& base_dir) {
  HarnessConfig c;
  c.base_dir = base_dir;
  try {
    for (const auto& [name, pj] : j.at("providers").items()) c.providers.emplace(name, provider_from_json(name, pj, base_dir));
    for (const json& mj : j.value("models", json::array())) {
      ModelSpec m;
      m.id = mj.at("id").get<std::string>();
      m.provider = mj.at("provider").get<std::string>();
      m.model = mj.value("model", m.id);
      m.temperature = mj.value("temperature", m.temperature);
      m.max_tokens = mj.value("max_tokens", m.max_tokens);
      if (mj.contains("reference_latency_s")) m.reference_latency_s = mj.at("reference_latency_s").get<double>();
      c.models.push_back(std::move(m));
    }
    if (j.contains("embedding")) {
      const json& ej = j.at("embedding");
      EmbeddingSpec e;
      e.provider = ej.at("provider").get<std::string>();
      e.sentence_model = ej.value("sentence_model", e.sentence_model);
      e.token_model = ej.value("token_model", e.token_model);
      c.embedding = std::move(e);
    }
    if (j.contains("judge") && !j.at("judge").is_null()) {
      const json& jj = j.at("judge");
      JudgeSpec s;
      s.provider = jj.at("provider").get<std::string>();
      s.model = jj.value("model", std::string{});
      s.temperature = jj.value("temperature", s.temperature);
      s.max_tokens = jj.value("max_tokens", s.max_tokens);
      s.include_image = jj.value("include_image", false);
      c.judge = std::move(s);
    }
    if (j.contains("prompt")) {
      const json& pj = j.at("prompt");
      c.prompt.mode = parse_prompt_mode(pj.value("mode", std::string("deterministic")));
      c.prompt.guidelines = resolve(base_dir, pj.value("guidelines", std::string{}));
      c.prompt.file = resolve(base_dir, pj.value("file", std::string{}));
      if (pj.contains("engineer")) {
        const json& ej = pj.at("engineer");
        c.prompt.engineer_provider = ej.at("provider").get<std::string>();
        c.prompt.engineer_model = ej.value("model", std::string{});
        c.prompt.engineer_temperature = ej.value("temperature", c.prompt.engineer_temperature);
        c.prompt.engineer_max_tokens = ej.value("max_tokens", c.prompt.engineer_max_tokens);
      }
    }
    if (j.contains("run")) {
      const json& rj = j.at("run");
      c.run.concurrency = rj.value("concurrency", c.run.concurrency);
      c.run.cache = rj.value("cache", c.run.cache);
      if (rj.contains("tracks")) {
        c.run.tracks.clear();
        for (const json& t : rj.at("tracks")) c.run.tracks.push_back(parse_track(t.get<std::string>()));
      }
      if (rj.contains("severity_scale")) c.run.scale = scale_from_json(rj.at("severity_scale"));
    }
    c.dataset = resolve(base_dir, j.value("dataset", std::string{}));
    c.cache_dir = resolve(base_dir, j.value("cache_dir", std::string(".cache/providers")));
    c.media_dir = resolve(base_dir, j.value("media_dir", std::string("media")));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const MetricError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

HarnessConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  return config_from_json(j, fs::absolute(path).parent_path());
}

ProviderRegistry::ProviderRegistry(const HarnessConfig& config, RegistryOptions options) {
  const fs::path cache_dir = options.cache_dir.value_or(config.cache_dir);
  if (options.cache || options.offline) store_ = std::make_shared<ReplayStore>(cache_dir);
  for (const auto& [name, pc] : config.providers) {
    std::shared_ptr<Provider> p;
    switch (pc.kind) {
      case ProviderKind::kStub: {
        auto stub = std::make_shared<StubProvider>(name, load_stub_spec(pc.stub_file));
        stubs_.emplace(name, stub);
        p = options.cache ? std::make_shared<CachingProvider>(stub, store_, name) : std::shared_ptr<Provider>(stub);
        break;
      }
      case ProviderKind::kReplay:
        p = std::make_shared<CachingProvider>(nullptr, std::make_shared<ReplayStore>(pc.cache_dir), name);
        break;
      case ProviderKind::kOpenAICompatible:
      case ProviderKind::kGeminiStyle:
        if (options.offline) {
          p = std::make_shared<CachingProvider>(nullptr, store_, name);
        } else {
          auto live = make_http_provider(pc, options.deps);
          p = options.cache ? std::make_shared<CachingProvider>(live, store_, name) : live;
        }
        break;
    }
    providers_.emplace(name, std::move(p));
  }
}

std::shared_ptr<Provider> ProviderRegistry::get(const std::string& name) const {
  const auto it = providers_.find(name);
  if (it == providers_.end()) throw ConfigError("unknown provider '" + name + "'");
  return it->second;
}

StubProvider* ProviderRegistry::stub(const std::string& name) const {
  const auto it = stubs_.find(name);
  return it == stubs_.end() ? nullptr : it->second.get();
}

std::size_t ProviderRegistry::stub_calls() const {
  std::size_t n = 0;
  for (const auto& [name, s] : stubs_) n += s->total_calls();
  return n;
}

void ProviderRegistry::reset_stub_counters() const {
  for (const auto& [name, s] : stubs_) s->reset_counters();
}

EngineeredPrompt resolve_prompt(const HarnessConfig& config, const ProviderRegistry& registry) {
  const ResponseTemplate tmpl{.severity_scale = config.run.scale};
  switch (config.prompt.mode) {
    case PromptMode::kFile: {
      std::ifstream in(config.prompt.file);
      if (!in) throw ConfigError("cannot read prompt file " + config.prompt.file.string());
      std::stringstream ss;
      ss << in.rdbuf();
      const json j = json::parse(ss.str(), nullptr, false);
      if (j.is_discarded()) throw ConfigError("prompt file " + config.prompt.file.string() + " is not valid JSON");
      return EngineeredPrompt::from_json(j);
    }
    case PromptMode::kMeta: {
      const GuidelineSet set = load_guidelines(config.prompt.guidelines);
      const GenerationParams params{config.prompt.engineer_temperature, config.prompt.engineer_max_tokens,
                                    config.prompt.engineer_model};
      return engineer_prompt(set, tmpl, *registry.get(config.prompt.engineer_provider), params);
    }
    case PromptMode::kDeterministic:
      break;
  }
  return deterministic_prompt(load_guidelines(config.prompt.guidelines), tmpl);
}

RunConfig build_run_config(const HarnessConfig& config, const ProviderRegistry& registry, EngineeredPrompt prompt,
                           const std::vector<std::string>& model_ids) {
  RunConfig rc;
  rc.prompt = std::move(prompt);
  rc.concurrency = config.run.concurrency;
  rc.tracks = config.run.tracks;
  rc.scale = config.run.scale;
  auto add = [&](const ModelSpec& m) {
    rc.models.push_back(ModelRun{m.id, m.provider, registry.get(m.provider), m.params(), m.reference_latency_s});
  };
  if (model_ids.empty()) {
    for (const ModelSpec& m : config.models) add(m);
  } else {
    for (const std::string& id : model_ids) add(config.model(id));
  }
  if (config.judge) {
    rc.judge = JudgeConfig{registry.get(config.judge->provider),
                           GenerationParams{config.judge->temperature, config.judge->max_tokens, config.judge->model},
                           config.judge->include_image};
  }
  rc.validate();
  return rc;
}

EmbeddingConfig build_embedding_config(const HarnessConfig& config, const ProviderRegistry& registry) {
  if (!config.embedding) throw ConfigError("config has no embedding section");
  return EmbeddingConfig{registry.get(config.embedding->provider), config.embedding->provider,
                         config.embedding->sentence_model, config.embedding->token_model};
}

}  // namespace hazlens
