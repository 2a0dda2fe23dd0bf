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

#include <openssl/evp.h>

#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hazlens/encoding.hpp"
#include "hazlens/providers.hpp"
#include "hazlens/rate_limiter.hpp"
#include "hazlens/replay.hpp"
#include "hazlens/stub_provider.hpp"
#include "oracle/oracles.hpp"
#include "support.hpp"

namespace hazlens {
namespace {

using nlohmann::json;
using testing::ScriptedTransport;
using namespace std::chrono_literals;

std::vector<std::uint8_t> bytes(std::string_view s) { return {s.begin(), s.end()}; }

TEST(Encoding, Sha256KnownAnswer) {
  EXPECT_EQ(sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Encoding, ThreeBytePayload) {
  const std::vector<std::uint8_t> payload{0x01, 0x02, 0x03};
  const ImageAttachment img = encode_image(payload, MediaType::kPng);
  EXPECT_EQ(img.data, "AQID");
  EXPECT_EQ(img.media_type, MediaType::kPng);
  EXPECT_EQ(img.content_hash, sha256_hex(payload));
  EXPECT_EQ(mime_type(img.media_type), "image/png");
}

TEST(Encoding, EmptyImageIsAPreconditionError) {
  try {
    encode_image({}, MediaType::kJpeg);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kPrecondition);
  }
}

TEST(Encoding, MediaTypes) {
  EXPECT_EQ(parse_media_type("jpg"), MediaType::kJpeg);
  EXPECT_EQ(parse_media_type("image/jpeg"), MediaType::kJpeg);
  EXPECT_EQ(parse_media_type("png"), MediaType::kPng);
  EXPECT_EQ(media_type_for_path("a/b.JPEG"), MediaType::kJpeg);
  EXPECT_THROW(media_type_for_path("a/b.gif"), ProviderError);
}

TEST(Encoding, Base64AgreesWithIndependentDecoders) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(0, 300), byte(0, 255);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::uint8_t> raw(len(rng));
    for (auto& b : raw) b = static_cast<std::uint8_t>(byte(rng));
    const std::string enc = base64_encode(raw);
    EXPECT_EQ(oracle::base64_decode(enc), raw);
    EXPECT_EQ(base64_decode(enc), raw);
    // OpenSSL's block decoder pads its output to a multiple of 3.
    std::vector<unsigned char> ossl(enc.size() / 4 * 3 + 3);
    const int n = EVP_DecodeBlock(ossl.data(), reinterpret_cast<const unsigned char*>(enc.data()),
                                  static_cast<int>(enc.size()));
    ASSERT_GE(n, 0);
    const std::size_t pad = std::count(enc.begin(), enc.end(), '=');
    ossl.resize(static_cast<std::size_t>(n) - pad);
    EXPECT_TRUE(std::equal(ossl.begin(), ossl.end(), raw.begin(), raw.end()));
  }
}

TEST(Encoding, StrictDecoderRejectsNonCanonicalInput) {
  for (const char* bad : {"A", "AQI", "AQ=D", "AQJ=", "AR==", "A===", "****", "AQID="}) {
    EXPECT_FALSE(base64_decode(bad).has_value()) << bad;
    EXPECT_FALSE(oracle::base64_decode(bad).has_value()) << bad;
  }
  EXPECT_EQ(base64_decode(""), std::vector<std::uint8_t>{});
}

TEST(Encoding, ReadImageFileHashesRawBytes) {
  const testing::TempDir dir;
  testing::write_text(dir / "x.jpg", std::string("\xff\xd8\xff", 3));
  const ImageAttachment img = read_image_file(dir / "x.jpg");
  EXPECT_EQ(img.media_type, MediaType::kJpeg);
  EXPECT_EQ(img.data, "/9j/");
  EXPECT_EQ(img.content_hash, sha256_hex(std::string_view("\xff\xd8\xff", 3)));
}

TEST(Params, Validation) {
  GenerationParams p;
  EXPECT_EQ(p.temperature, 0.3);
  EXPECT_EQ(p.max_tokens, 250);
  p.temperature = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = GenerationParams{};
  p.max_tokens = 0;
  EXPECT_THROW(p.validate(), ConfigError);
}

// ---- stub -----------------------------------------------------------------

TEST(Stub, RulesMatchOnImageThenPrompt) {
  const ImageAttachment a = encode_image(bytes("image-a"), MediaType::kPng);
  const ImageAttachment b = encode_image(bytes("image-b"), MediaType::kPng);
  StubSpec spec;
  spec.rules.push_back(StubRule{a.content_hash, {}, {}, "answer A", {}});
  spec.rules.push_back(StubRule{{}, {}, std::string("judge"), "answer J", {}});
  spec.default_text = "fallback";
  spec.latency_s = 0.25;
  StubProvider stub("s", spec);
  const GenerationParams p;
  EXPECT_EQ(stub.complete("look", &a, p).text, "answer A");
  EXPECT_EQ(stub.complete("please judge", &b, p).text, "answer J");
  EXPECT_EQ(stub.complete("look", &b, p).text, "fallback");
  EXPECT_DOUBLE_EQ(stub.complete("look", &a, p).latency_s, 0.25);
  EXPECT_EQ(stub.complete_calls(), 4u);
  stub.reset_counters();
  EXPECT_EQ(stub.total_calls(), 0u);
}

TEST(Stub, NoMatchAndFailuresAreProviderErrors) {
  StubSpec spec;
  spec.rules.push_back(StubRule{{}, {}, std::string("boom"), "", ProviderErrorKind::kTransientExhausted});
  StubProvider stub("s", spec);
  try {
    stub.complete("boom now", nullptr, {});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kTransientExhausted);
  }
  EXPECT_THROW(stub.complete("anything else", nullptr, {}), ProviderError);
  EXPECT_THROW(stub.complete("   ", nullptr, {}), ProviderError);
}

TEST(Stub, JitterIsDeterministicAndBounded) {
  StubSpec spec;
  spec.default_text = "x";
  spec.latency_s = 1.0;
  spec.latency_jitter_s = 0.5;
  StubProvider s1("s", spec), s2("s", spec);
  for (int i = 0; i < 50; ++i) {
    const std::string prompt = "prompt " + std::to_string(i);
    const double l = s1.complete(prompt, nullptr, {}).latency_s;
    EXPECT_EQ(l, s2.complete(prompt, nullptr, {}).latency_s);
    EXPECT_GE(l, 1.0);
    EXPECT_LT(l, 1.5);
  }
}

TEST(Stub, SpecFromJson) {
  const StubSpec spec = stub_spec_from_json(json::parse(R"({
    "default_text": "d", "latency_s": 0.5, "latency_jitter_s": 0.1,
    "completions": [{"prompt_contains": "x", "text": "t"}, {"prompt_contains": "y", "fail": "auth"}],
    "embedding": {"dim": 8, "words": {"ladder": [1,0,0,0,0,0,0,0]}}})"));
  EXPECT_EQ(spec.default_text, "d");
  EXPECT_EQ(spec.rules.size(), 2u);
  EXPECT_EQ(spec.rules[1].fail, ProviderErrorKind::kAuth);
  EXPECT_EQ(spec.embedding_dim, 8u);
  EXPECT_EQ(spec.word_vectors.at("ladder").size(), 8u);
  EXPECT_THROW(stub_spec_from_json(json::parse(R"({"latency_s": -1})")), ConfigError);
}

TEST(Stub, EmbeddingsAreDeterministic) {
  StubSpec spec;
  spec.embedding_dim = 4;
  spec.word_vectors["ladder"] = {0, 0, 3, 4};
  StubProvider stub("e", spec);
  const std::vector<std::string> texts{"Unsecured ladder", "Open trench", "Unsecured ladder"};
  const auto v = stub.embed_sentence(texts, "m");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], v[2]);
  EXPECT_NE(v[0], v[1]);
  EXPECT_EQ(v[0].dim(), 4u);

  const TokenEmbeddingSet t = stub.embed_tokens("Ladder, ladder!", "m");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.vectors()[0], t.vectors()[1]);
  EXPECT_NEAR(t.vectors()[0].values()[2], 0.6, 1e-15);
  EXPECT_EQ(stub.embed_tokens("Ladder, ladder!", "m"), t);
  EXPECT_EQ(stub.embed_tokens("one", "m").size(), 1u);
  EXPECT_THROW(stub.embed_sentence(std::vector<std::string>{"a", " "}, "m"), ProviderError);
  EXPECT_THROW(stub.embed_tokens("", "m"), ProviderError);
}

TEST(Stub, TokenizerLowercasesWords) {
  EXPECT_EQ(stub_tokenize("Hazard No. 1: PPE-Compliance"),
            (std::vector<std::string>{"hazard", "no", "1", "ppe", "compliance"}));
}

// ---- replay ---------------------------------------------------------------

TEST(Replay, KeyCoversEveryRequestField) {
  const json base = completion_request("m", "p", "h", 0.3, 250);
  EXPECT_EQ(request_digest(base), request_digest(completion_request("m", "p", "h", 0.3, 250)));
  EXPECT_NE(request_digest(base), request_digest(completion_request("m2", "p", "h", 0.3, 250)));
  EXPECT_NE(request_digest(base), request_digest(completion_request("m", "p2", "h", 0.3, 250)));
  EXPECT_NE(request_digest(base), request_digest(completion_request("m", "p", "h2", 0.3, 250)));
  EXPECT_NE(request_digest(base), request_digest(completion_request("m", "p", "h", 0.4, 250)));
  EXPECT_NE(request_digest(base), request_digest(completion_request("m", "p", "h", 0.3, 251)));
}

TEST(Replay, CachingProviderRecordsThenServes) {
  const testing::TempDir dir;
  StubSpec spec;
  spec.default_text = "canned";
  spec.latency_s = 2.5;
  spec.embedding_dim = 6;
  auto stub = std::make_shared<StubProvider>("s", spec);
  auto store = std::make_shared<ReplayStore>(dir.path());
  CachingProvider cached(stub, store);
  GenerationParams p;
  p.model_id = "m";
  const ImageAttachment img = encode_image(bytes("pix"), MediaType::kPng);
  const CompletionResult first = cached.complete("prompt", &img, p);
  const auto sv = cached.embed_sentence(std::vector<std::string>{"a b", "c"}, "mini");
  const TokenEmbeddingSet tv = cached.embed_tokens("a b c", "roberta");
  EXPECT_EQ(stub->total_calls(), 3u);

  stub->reset_counters();
  const CompletionResult again = cached.complete("prompt", &img, p);
  EXPECT_EQ(again.text, first.text);
  EXPECT_EQ(again.latency_s, first.latency_s);
  EXPECT_EQ(cached.embed_sentence(std::vector<std::string>{"c", "a b"}, "mini"),
            (std::vector<EmbeddingVector>{sv[1], sv[0]}));
  EXPECT_EQ(cached.embed_tokens("a b c", "roberta"), tv);
  EXPECT_EQ(stub->total_calls(), 0u);

  // A pure replay provider over the same directory needs no backend at all.
  CachingProvider replay(nullptr, std::make_shared<ReplayStore>(dir.path()), "r");
  EXPECT_EQ(replay.kind(), ProviderKind::kReplay);
  EXPECT_EQ(replay.complete("prompt", &img, p).text, "canned");
  try {
    replay.complete("other prompt", &img, p);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kCacheMiss);
  }
}

// ---- HTTP -----------------------------------------------------------------

struct Harness {
  std::shared_ptr<ScriptedTransport> transport;
  std::vector<std::chrono::milliseconds> sleeps;
  std::shared_ptr<Provider> provider;
  std::vector<std::string> env_reads;

  Harness(std::vector<ScriptedTransport::Step> steps, ProviderKind kind = ProviderKind::kOpenAICompatible,
          std::optional<std::string> key = std::string("sk-test")) {
    transport = std::make_shared<ScriptedTransport>(std::move(steps));
    ProviderConfig c;
    c.name = "live";
    c.kind = kind;
    c.base_url = "https://api.example.test/v1/";
    c.credential_ref = "HAZLENS_TEST_KEY";
    c.rate_limit_rpm = 60000;
    c.retry = {3, 100ms};
    ProviderDeps deps;
    deps.transport = transport;
    deps.getenv = [this, key](const std::string& name) {
      env_reads.push_back(name);
      return key;
    };
    deps.sleep = [this](std::chrono::milliseconds d) { sleeps.push_back(d); };
    provider = make_http_provider(c, deps);
  }
};

TEST(Http, RetriesTransientStatusThenSucceeds) {
  Harness h({{429, "slow down"}, {429, "slow down", std::string("2")}, {200, testing::openai_chat_body("ok")}});
  GenerationParams p;
  p.model_id = "gpt-4o";
  const CompletionResult r = h.provider->complete("hello", nullptr, p);
  EXPECT_EQ(r.text, "ok");
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(h.transport->calls, 3u);
  EXPECT_EQ(h.sleeps, (std::vector<std::chrono::milliseconds>{100ms, 2000ms}));
  EXPECT_GE(r.latency_s, 0.0);
  EXPECT_EQ(r.token_usage, (TokenUsage{11, 7}));

  const HttpRequest& req = h.transport->requests.back();
  EXPECT_EQ(req.url, "https://api.example.test/v1/chat/completions");
  const json body = json::parse(req.body);
  EXPECT_EQ(body["model"], "gpt-4o");
  EXPECT_EQ(body["temperature"], 0.3);
  EXPECT_EQ(body["max_tokens"], 250);
}

TEST(Http, RetryBudgetExhausts) {
  Harness h({{503, ""}, {ScriptedTransport::Step{0, "", {}, true}}, {500, ""}});
  try {
    h.provider->complete("hello", nullptr, {});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kTransientExhausted);
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(h.transport->calls, 3u);
  EXPECT_EQ(h.sleeps, (std::vector<std::chrono::milliseconds>{100ms, 200ms}));
}

TEST(Http, AuthFailureIsNotRetried) {
  Harness h({{401, "bad key"}});
  try {
    h.provider->complete("hello", nullptr, {});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kAuth);
  }
  EXPECT_EQ(h.transport->calls, 1u);
  EXPECT_TRUE(h.sleeps.empty());
}

TEST(Http, ClientErrorIsRejectedWithoutRetry) {
  Harness h({{400, "bad request"}});
  try {
    h.provider->complete("hello", nullptr, {});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kRejected);
  }
  EXPECT_EQ(h.transport->calls, 1u);
}

TEST(Http, MissingCredentialMakesNoCalls) {
  Harness h({{200, testing::openai_chat_body("ok")}}, ProviderKind::kOpenAICompatible, std::nullopt);
  try {
    h.provider->complete("hello", nullptr, {});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kAuth);
    EXPECT_NE(std::string(e.what()).find("HAZLENS_TEST_KEY"), std::string::npos) << e.what();
  }
  EXPECT_EQ(h.transport->calls, 0u);
}

TEST(Http, MalformedBodies) {
  for (const char* body : {"not json", "{}", R"({"choices": []})", R"({"choices": [{"message": {}}]})"}) {
    Harness h({{200, body}});
    try {
      h.provider->complete("hello", nullptr, {});
      FAIL() << body;
    } catch (const ProviderError& e) {
      EXPECT_EQ(e.kind(), ProviderErrorKind::kMalformedResponse) << body;
    }
  }
}

TEST(Http, OpenAiImageAndEmbeddings) {
  const json emb = {{"data", {{{"index", 1}, {"embedding", {0, 1}}}, {{"index", 0}, {"embedding", {1, 0}}}}}};
  Harness h({{200, testing::openai_chat_body("ok")}, {200, emb.dump()}});
  const ImageAttachment img = encode_image(std::vector<std::uint8_t>{1, 2, 3}, MediaType::kPng);
  h.provider->complete("look", &img, {});
  const json sent = json::parse(h.transport->requests[0].body);
  EXPECT_EQ(sent["messages"][0]["content"][1]["image_url"]["url"], "data:image/png;base64,AQID");
  const auto& headers = h.transport->requests[0].headers;
  EXPECT_NE(std::find(headers.begin(), headers.end(), std::pair<std::string, std::string>("Authorization",
                                                                                          "Bearer sk-test")),
            headers.end());
  const auto v = h.provider->embed_sentence(std::vector<std::string>{"a", "b"}, "mini");
  EXPECT_EQ(v[0], EmbeddingVector({1, 0}));
  EXPECT_EQ(v[1], EmbeddingVector({0, 1}));
  EXPECT_EQ(h.transport->requests[1].url, "https://api.example.test/v1/embeddings");
}

TEST(Http, TokenEmbeddingSidecar) {
  const json body = {{"tokens", {"open", "trench"}}, {"embeddings", {{3, 4}, {0, 2}}}};
  Harness h({{200, body.dump()}});
  const TokenEmbeddingSet t = h.provider->embed_tokens("open trench", "roberta-large");
  EXPECT_EQ(t.tokens(), (std::vector<std::string>{"open", "trench"}));
  EXPECT_NEAR(t.vectors()[0].values()[0], 0.6, 1e-15);
  EXPECT_EQ(h.transport->requests[0].url, "https://api.example.test/v1/token_embeddings");
  EXPECT_EQ(json::parse(h.transport->requests[0].body), (json{{"model", "roberta-large"}, {"input", "open trench"}}));
}

TEST(Http, GeminiWireFormat) {
  const json reply = {{"candidates", {{{"content", {{"parts", {{{"text", "Summary: "}}, {{"text", "ok"}}}}}}}}},
                      {"usageMetadata", {{"promptTokenCount", 5}, {"candidatesTokenCount", 2}}}};
  Harness h({{200, reply.dump()}}, ProviderKind::kGeminiStyle);
  GenerationParams p;
  p.model_id = "gemini-1.5-pro";
  const ImageAttachment img = encode_image(std::vector<std::uint8_t>{1, 2, 3}, MediaType::kJpeg);
  const CompletionResult r = h.provider->complete("look", &img, p);
  EXPECT_EQ(r.text, "Summary: ok");
  EXPECT_EQ(r.token_usage, (TokenUsage{5, 2}));
  const HttpRequest& req = h.transport->requests[0];
  EXPECT_EQ(req.url, "https://api.example.test/v1/models/gemini-1.5-pro:generateContent");
  const json sent = json::parse(req.body);
  EXPECT_EQ(sent["generationConfig"]["maxOutputTokens"], 250);
  EXPECT_EQ(sent["contents"][0]["parts"][1]["inline_data"]["mime_type"], "image/jpeg");
  try {
    h.provider->embed_tokens("x", "m");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::kUnsupported);
  }
}

TEST(Http, ConfigValidation) {
  ProviderConfig c;
  c.name = "x";
  c.kind = ProviderKind::kOpenAICompatible;
  c.base_url = "https://x";
  c.retry.max_attempts = 0;
  EXPECT_THROW(make_http_provider(c), ConfigError);
  c.retry.max_attempts = 1;
  c.rate_limit_rpm = 0;
  EXPECT_THROW(make_http_provider(c), ConfigError);
  c.rate_limit_rpm = 60;
  c.kind = ProviderKind::kStub;
  EXPECT_THROW(make_http_provider(c), ConfigError);
}

// ---- rate limiter -----------------------------------------------------------

TEST(TokenBucket, RefillsAtTheConfiguredRate) {
  TokenBucket::Clock::time_point now{};
  TokenBucket bucket(60.0, 2.0, [&] { return now; });
  EXPECT_EQ(bucket.try_acquire(), TokenBucket::Clock::duration::zero());
  EXPECT_EQ(bucket.try_acquire(), TokenBucket::Clock::duration::zero());
  const auto wait = bucket.try_acquire();
  EXPECT_EQ(std::chrono::duration_cast<std::chrono::milliseconds>(wait), 1000ms);
  now += 500ms;
  EXPECT_EQ(std::chrono::duration_cast<std::chrono::milliseconds>(bucket.try_acquire()), 500ms);
  now += 500ms;
  EXPECT_EQ(bucket.try_acquire(), TokenBucket::Clock::duration::zero());
  now += std::chrono::hours(1);
  EXPECT_EQ(bucket.try_acquire(), TokenBucket::Clock::duration::zero());
  EXPECT_EQ(bucket.try_acquire(), TokenBucket::Clock::duration::zero());
  EXPECT_NE(bucket.try_acquire(), TokenBucket::Clock::duration::zero());
  EXPECT_THROW(TokenBucket(0.0, 1.0), ConfigError);
  EXPECT_EQ(TokenBucket::default_burst(600), 10.0);
  EXPECT_EQ(TokenBucket::default_burst(10), 1.0);
}

}  // namespace
}  // namespace hazlens
