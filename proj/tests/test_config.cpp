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

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hazlens/config.hpp"
#include "support.hpp"

namespace hazlens {
namespace {

using nlohmann::json;

json minimal() {
  return json::parse(R"({
    "providers": {"v": {"kind": "stub", "stub_file": "stubs/vlm_alpha.json"},
                  "e": {"kind": "stub", "stub_file": "stubs/embedder.json"}},
    "models": [{"id": "m", "provider": "v"}],
    "embedding": {"provider": "e"},
    "prompt": {"guidelines": "guidelines.json"},
    "dataset": "dataset/dataset.jsonl"})");
}

TEST(Config, GoldenConfigLoads) {
  const HarnessConfig c = load_config(testing::fixture_dir() / "golden_config.json");
  EXPECT_EQ(c.providers.size(), 4u);
  ASSERT_EQ(c.models.size(), 2u);
  EXPECT_EQ(c.models[0].id, "vlm-alpha");
  EXPECT_EQ(c.models[0].model, "alpha-1");
  EXPECT_EQ(c.models[0].temperature, 0.3);
  EXPECT_EQ(c.models[0].max_tokens, 250);
  EXPECT_EQ(c.run.concurrency, 4);
  EXPECT_EQ(c.run.scale, (SeverityScale{1, 10}));
  EXPECT_EQ(c.embedding->sentence_model, "paraphrase-MiniLM-L12-v2");
  EXPECT_EQ(c.embedding->token_model, "roberta-large");
  EXPECT_EQ(c.judge->model, "judge-1");
  EXPECT_TRUE(c.dataset.is_absolute());
  EXPECT_TRUE(std::filesystem::exists(c.dataset));
  EXPECT_TRUE(std::filesystem::exists(c.providers.at("alpha").stub_file));
  EXPECT_EQ(&c.model("vlm-beta"), &c.models[1]);
  EXPECT_THROW(c.model("gpt-4o"), ConfigError);
}

TEST(Config, DefaultsApply) {
  const HarnessConfig c = config_from_json(minimal(), testing::fixture_dir());
  EXPECT_EQ(c.models[0].model, "m");
  EXPECT_EQ(c.run.tracks.size(), 2u);
  EXPECT_TRUE(c.run.cache);
  EXPECT_FALSE(c.judge.has_value());
  EXPECT_EQ(c.prompt.mode, PromptMode::kDeterministic);
  EXPECT_EQ(c.cache_dir, testing::fixture_dir() / ".cache/providers");
}

TEST(Config, CrossReferencesAreChecked) {
  json j = minimal();
  j["models"][0]["provider"] = "missing";
  EXPECT_THROW(config_from_json(j, testing::fixture_dir()), ConfigError);
  j = minimal();
  j["models"].push_back(j["models"][0]);
  EXPECT_THROW(config_from_json(j, testing::fixture_dir()), ConfigError);
  j = minimal();
  j["judge"] = {{"provider", "nobody"}};
  EXPECT_THROW(config_from_json(j, testing::fixture_dir()), ConfigError);
  j = minimal();
  j["run"] = {{"severity_scale", {5, 1}}};
  EXPECT_THROW(config_from_json(j, testing::fixture_dir()), ConfigError);
  j = minimal();
  j["run"] = {{"concurrency", 0}};
  EXPECT_THROW(config_from_json(j, testing::fixture_dir()), ConfigError);
  j = minimal();
  j["providers"]["v"]["kind"] = "carrier-pigeon";
  EXPECT_THROW(config_from_json(j, testing::fixture_dir()), Error);
  j = minimal();
  j["prompt"] = {{"mode", "meta"}, {"guidelines", "guidelines.json"}};
  EXPECT_THROW(config_from_json(j, testing::fixture_dir()), ConfigError);
  j = minimal();
  j["providers"]["v"]["retry"] = {{"base_backoff_s", -1}};
  EXPECT_THROW(config_from_json(j, testing::fixture_dir()), ConfigError);
}

TEST(Config, UnreadableFiles) {
  const testing::TempDir dir;
  EXPECT_THROW(load_config(dir / "absent.json"), ConfigError);
  testing::write_text(dir / "bad.json", "{");
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
}

TEST(Config, OfflineLiveProviderOnlyReplays) {
  const testing::TempDir dir;
  json j = minimal();
  j["providers"]["live"] = {{"kind", "openai_compatible"}, {"base_url", "https://api.example.test/v1"},
                            {"credential_ref", "HAZLENS_UNSET_KEY"}};
  j["models"][0]["provider"] = "live";
  const HarnessConfig c = config_from_json(j, testing::fixture_dir());
  auto transport = std::make_shared<testing::ScriptedTransport>(
      std::vector<testing::ScriptedTransport::Step>{{200, testing::openai_chat_body("x")}});
  RegistryOptions o;
  o.offline = true;
  o.cache_dir = dir / "cache";
  o.deps.transport = transport;
  const ProviderRegistry reg(c, o);
  try {
    reg.get("live")->complete("hello", nullptr, {});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kCacheMiss);
  }
  EXPECT_EQ(transport->calls, 0u);
  EXPECT_THROW(reg.get("nope"), ConfigError);
  EXPECT_EQ(reg.stub("live"), nullptr);
}

TEST(Config, PromptModes) {
  const testing::TempDir dir;
  const HarnessConfig det = config_from_json(minimal(), testing::fixture_dir());
  const ProviderRegistry reg(det, RegistryOptions{.cache = false});
  const EngineeredPrompt p = resolve_prompt(det, reg);
  EXPECT_EQ(p.provenance, PromptProvenance::kDeterministic);

  testing::write_text(dir / "prompt.json", p.to_json().dump());
  json fj = minimal();
  fj["prompt"] = {{"mode", "file"}, {"file", (dir / "prompt.json").string()}};
  const HarnessConfig file = config_from_json(fj, testing::fixture_dir());
  EXPECT_EQ(resolve_prompt(file, reg).text, p.text);

  testing::write_text(dir / "engineer.json", R"({"default_text": "Inspect the photo for every hazard."})");
  json mj = minimal();
  mj["providers"]["eng"] = {{"kind", "stub"}, {"stub_file", (dir / "engineer.json").string()}};
  mj["prompt"] = {{"mode", "meta"}, {"guidelines", "guidelines.json"}, {"engineer", {{"provider", "eng"}}}};
  const HarnessConfig meta = config_from_json(mj, testing::fixture_dir());
  const ProviderRegistry mreg(meta, RegistryOptions{.cache = false});
  const EngineeredPrompt mp = resolve_prompt(meta, mreg);
  EXPECT_EQ(mp.text, "Inspect the photo for every hazard.");
  EXPECT_EQ(mp.provenance, PromptProvenance::kMetaPrompted);
  EXPECT_EQ(mreg.stub("eng")->complete_calls(), 1u);
}

TEST(Config, RunAndEmbeddingConfigs) {
  const HarnessConfig c = load_config(testing::fixture_dir() / "golden_config.json");
  const ProviderRegistry reg(c, RegistryOptions{.cache = false});
  const RunConfig rc = build_run_config(c, reg, resolve_prompt(c, reg));
  EXPECT_EQ(rc.models.size(), 2u);
  EXPECT_EQ(rc.models[1].params.model_id, "beta-1");
  EXPECT_EQ(rc.concurrency, 4);
  ASSERT_TRUE(rc.judge.has_value());
  EXPECT_EQ(rc.judge->params.model_id, "judge-1");
  EXPECT_FALSE(rc.judge->include_image);
  const EmbeddingConfig ec = build_embedding_config(c, reg);
  EXPECT_EQ(ec.provider_name, "embedder");
  HarnessConfig none = c;
  none.embedding.reset();
  EXPECT_THROW(build_embedding_config(none, reg), ConfigError);
}

}  // namespace
}  // namespace hazlens
