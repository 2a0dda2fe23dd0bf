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

#include "hazlens/providers.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hazlens/encoding.hpp"
#include "hazlens/rate_limiter.hpp"

namespace hazlens {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

void GenerationParams::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kOpenAICompatible:
      return "openai_compatible";
    case ProviderKind::kGeminiStyle:
      return "gemini_style";
    case ProviderKind::kStub:
      return "stub";
    case ProviderKind::kReplay:
      return "replay";
  }
  return "unknown";
}

ProviderKind parse_provider_kind(std::string_view name) {
  if (name == "openai_compatible") return ProviderKind::kOpenAICompatible;
  if (name == "gemini_style") return ProviderKind::kGeminiStyle;
  if (name == "stub") return ProviderKind::kStub;
  if (name == "replay") return ProviderKind::kReplay;
  throw ConfigError("unknown provider kind '" + std::string(name) + "'");
}

void ProviderConfig::validate() const {
  if (retry.max_attempts < 1) throw ConfigError("provider '" + name + "': max_attempts must be >= 1");
  if (retry.base_backoff.count() < 0) throw ConfigError("provider '" + name + "': negative backoff");
  if (is_live(kind)) {
    if (base_url.empty()) throw ConfigError("provider '" + name + "': base_url is required");
    if (!(rate_limit_rpm > 0.0)) throw ConfigError("provider '" + name + "': rate_limit must be > 0");
    if (timeout.count() <= 0) throw ConfigError("provider '" + name + "': timeout must be positive");
  }
  if (kind == ProviderKind::kReplay && cache_dir.empty()) {
    throw ConfigError("provider '" + name + "': replay kind needs cache_dir");
  }
}

std::string_view to_string(ProviderErrorKind kind) {
  switch (kind) {
    case ProviderErrorKind::kAuth:
      return "auth";
    case ProviderErrorKind::kTransientExhausted:
      return "transient_exhausted";
    case ProviderErrorKind::kMalformedResponse:
      return "malformed_response";
    case ProviderErrorKind::kRejected:
      return "rejected";
    case ProviderErrorKind::kPrecondition:
      return "precondition";
    case ProviderErrorKind::kUnsupported:
      return "unsupported";
    case ProviderErrorKind::kCacheMiss:
      return "cache_miss";
  }
  return "unknown";
}

std::string_view mime_type(MediaType type) {
  return type == MediaType::kJpeg ? "image/jpeg" : "image/png";
}

MediaType parse_media_type(std::string_view name) {
  const std::string n = to_lower_ascii(name);
  if (n == "jpeg" || n == "jpg" || n == "image/jpeg") return MediaType::kJpeg;
  if (n == "png" || n == "image/png") return MediaType::kPng;
  throw ProviderError(ProviderErrorKind::kUnsupported, "unsupported media type '" + std::string(name) + "'");
}

MediaType media_type_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  if (!ext.empty() && ext.front() == '.') ext.erase(0, 1);
  return parse_media_type(ext);
}

ImageAttachment encode_image(std::span<const std::uint8_t> bytes, MediaType media_type) {
  if (bytes.empty()) throw ProviderError(ProviderErrorKind::kPrecondition, "image payload is empty");
  return ImageAttachment{media_type, base64_encode(bytes), sha256_hex(bytes)};
}

ImageAttachment read_image_file(const std::filesystem::path& path) {
  const MediaType type = media_type_for_path(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProviderError(ProviderErrorKind::kPrecondition, "cannot read image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return encode_image(bytes, type);
}

json completion_to_json(const CompletionResult& c) {
  json j{{"text", c.text}, {"latency_s", c.latency_s}, {"attempts", c.attempts}};
  if (c.token_usage) {
    j["token_usage"] = {{"prompt", c.token_usage->prompt}, {"completion", c.token_usage->completion}};
  } else {
    j["token_usage"] = nullptr;
  }
  return j;
}

CompletionResult completion_from_json(const json& j) {
  CompletionResult c;
  c.text = j.at("text").get<std::string>();
  c.latency_s = j.at("latency_s").get<double>();
  c.attempts = j.value("attempts", 1);
  if (j.contains("token_usage") && !j.at("token_usage").is_null()) {
    const json& u = j.at("token_usage");
    c.token_usage = TokenUsage{u.value("prompt", 0), u.value("completion", 0)};
  }
  return c;
}

// ---- Provider base --------------------------------------------------------

CompletionResult Provider::complete(std::string_view prompt, const ImageAttachment* image,
                                    const GenerationParams& params) {
  params.validate();
  if (is_blank(prompt)) throw ProviderError(ProviderErrorKind::kPrecondition, "prompt is blank");
  CompletionResult r = do_complete(prompt, image, params);
  if (r.latency_s < 0.0) r.latency_s = 0.0;
  return r;
}

std::vector<EmbeddingVector> Provider::embed_sentence(std::span<const std::string> texts,
                                                      std::string_view model_id) {
  if (texts.empty()) throw ProviderError(ProviderErrorKind::kPrecondition, "no texts to embed");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (is_blank(texts[i])) {
      throw ProviderError(ProviderErrorKind::kPrecondition,
                          "text " + std::to_string(i) + " in embedding batch is blank");
    }
  }
  std::vector<EmbeddingVector> out = do_embed_sentence(texts, model_id);
  if (out.size() != texts.size()) {
    throw ProviderError(ProviderErrorKind::kMalformedResponse,
                        "embedding count " + std::to_string(out.size()) + " != input count " +
                            std::to_string(texts.size()));
  }
  for (const EmbeddingVector& v : out) {
    if (v.dim() != out.front().dim() || v.dim() == 0) {
      throw ProviderError(ProviderErrorKind::kMalformedResponse, "embedding dimension mismatch in batch");
    }
  }
  return out;
}

TokenEmbeddingSet Provider::embed_tokens(std::string_view text, std::string_view model_id) {
  if (is_blank(text)) throw ProviderError(ProviderErrorKind::kPrecondition, "text to embed is blank");
  return do_embed_tokens(text, model_id);
}

// ---- HTTP providers -------------------------------------------------------

namespace {

// Provider-specific request building and response decoding.
class WireAdapter {
 public:
  virtual ~WireAdapter() = default;
  virtual HttpRequest chat_request(const std::string& base, const std::optional<std::string>& key,
                                   std::string_view prompt, const ImageAttachment* image,
                                   const GenerationParams& params) const = 0;
  virtual CompletionResult parse_chat(const json& body) const = 0;
  virtual HttpRequest embed_request(const std::string& base, const std::optional<std::string>& key,
                                    std::span<const std::string> texts, std::string_view model) const = 0;
  virtual std::vector<EmbeddingVector> parse_embed(const json& body) const = 0;
  virtual std::optional<HttpRequest> token_request(const std::string& base,
                                                   const std::optional<std::string>& key,
                                                   std::string_view text, std::string_view model) const = 0;
};

[[noreturn]] void malformed(const std::string& what) {
  throw ProviderError(ProviderErrorKind::kMalformedResponse, "malformed provider response: " + what);
}

std::vector<double> number_array(const json& arr) {
  if (!arr.is_array()) malformed("expected a numeric array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number()) malformed("non-numeric embedding entry");
    out.push_back(v.get<double>());
  }
  return out;
}

EmbeddingVector to_vector(const json& arr) {
  try {
    return EmbeddingVector(number_array(arr));
  } catch (const MetricError& e) {
    malformed(e.what());
  }
}

std::string strip_trailing_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

class OpenAIAdapter final : public WireAdapter {
 public:
  HttpRequest chat_request(const std::string& base, const std::optional<std::string>& key,
                           std::string_view prompt, const ImageAttachment* image,
                           const GenerationParams& params) const override {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", std::string(prompt)}});
    if (image) {
      const std::string url = "data:" + std::string(mime_type(image->media_type)) + ";base64," + image->data;
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    }
    json body{{"model", params.model_id},
              {"messages", json::array({{{"role", "user"}, {"content", std::move(content)}}})},
              {"temperature", params.temperature},
              {"max_tokens", params.max_tokens}};
    return make(base + "/chat/completions", key, body);
  }

  CompletionResult parse_chat(const json& body) const override {
    const auto choices = body.find("choices");
    if (choices == body.end() || !choices->is_array() || choices->empty()) malformed("no choices");
    const json& message = (*choices)[0].value("message", json::object());
    const auto content = message.find("content");
    if (content == message.end()) malformed("choice has no message content");
    CompletionResult r;
    if (content->is_string()) {
      r.text = content->get<std::string>();
    } else if (content->is_array()) {
      for (const json& part : *content) {
        if (part.is_object() && part.contains("text") && part["text"].is_string()) {
          r.text += part["text"].get<std::string>();
        }
      }
    } else {
      malformed("message content is not text");
    }
    if (const auto usage = body.find("usage"); usage != body.end() && usage->is_object()) {
      r.token_usage = TokenUsage{usage->value("prompt_tokens", 0), usage->value("completion_tokens", 0)};
    }
    return r;
  }

  HttpRequest embed_request(const std::string& base, const std::optional<std::string>& key,
                            std::span<const std::string> texts, std::string_view model) const override {
    json body{{"model", std::string(model)}, {"input", json(std::vector<std::string>(texts.begin(), texts.end()))}};
    return make(base + "/embeddings", key, body);
  }

  std::vector<EmbeddingVector> parse_embed(const json& body) const override {
    const auto data = body.find("data");
    if (data == body.end() || !data->is_array()) malformed("embedding response has no data array");
    std::vector<std::pair<long long, EmbeddingVector>> indexed;
    for (std::size_t i = 0; i < data->size(); ++i) {
      const json& item = (*data)[i];
      if (!item.is_object() || !item.contains("embedding")) malformed("embedding item lacks 'embedding'");
      const long long index = item.value("index", static_cast<long long>(i));
      indexed.emplace_back(index, to_vector(item["embedding"]));
    }
    std::stable_sort(indexed.begin(), indexed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<EmbeddingVector> out;
    for (auto& [_, v] : indexed) out.push_back(std::move(v));
    return out;
  }

  // Token-level embeddings are not part of the OpenAI API; this is the
  // contract of the companion token-embedding server (see README).
  std::optional<HttpRequest> token_request(const std::string& base, const std::optional<std::string>& key,
                                           std::string_view text, std::string_view model) const override {
    json body{{"model", std::string(model)}, {"input", std::string(text)}};
    return make(base + "/token_embeddings", key, body);
  }

 private:
  static HttpRequest make(std::string url, const std::optional<std::string>& key, const json& body) {
    HttpRequest req;
    req.url = std::move(url);
    if (key) req.headers.emplace_back("Authorization", "Bearer " + *key);
    req.body = body.dump();
    return req;
  }
};

class GeminiAdapter final : public WireAdapter {
 public:
  HttpRequest chat_request(const std::string& base, const std::optional<std::string>& key,
                           std::string_view prompt, const ImageAttachment* image,
                           const GenerationParams& params) const override {
    json parts = json::array();
    parts.push_back({{"text", std::string(prompt)}});
    if (image) {
      parts.push_back({{"inline_data", {{"mime_type", std::string(mime_type(image->media_type))},
                                        {"data", image->data}}}});
    }
    json body{{"contents", json::array({{{"role", "user"}, {"parts", std::move(parts)}}})},
              {"generationConfig",
               {{"temperature", params.temperature}, {"maxOutputTokens", params.max_tokens}}}};
    return make(base + "/models/" + params.model_id + ":generateContent", key, body);
  }

  CompletionResult parse_chat(const json& body) const override {
    const auto candidates = body.find("candidates");
    if (candidates == body.end() || !candidates->is_array() || candidates->empty()) {
      malformed("no candidates");
    }
    const json& content = (*candidates)[0].value("content", json::object());
    const auto parts = content.find("parts");
    if (parts == content.end() || !parts->is_array()) malformed("candidate has no parts");
    CompletionResult r;
    for (const json& part : *parts) {
      if (part.is_object() && part.contains("text") && part["text"].is_string()) {
        r.text += part["text"].get<std::string>();
      }
    }
    if (const auto usage = body.find("usageMetadata"); usage != body.end() && usage->is_object()) {
      r.token_usage = TokenUsage{usage->value("promptTokenCount", 0), usage->value("candidatesTokenCount", 0)};
    }
    return r;
  }

  HttpRequest embed_request(const std::string& base, const std::optional<std::string>& key,
                            std::span<const std::string> texts, std::string_view model) const override {
    json requests = json::array();
    for (const std::string& t : texts) {
      requests.push_back({{"model", "models/" + std::string(model)},
                          {"content", {{"parts", json::array({{{"text", t}}})}}}});
    }
    return make(base + "/models/" + std::string(model) + ":batchEmbedContents", key,
                json{{"requests", std::move(requests)}});
  }

  std::vector<EmbeddingVector> parse_embed(const json& body) const override {
    const auto embeddings = body.find("embeddings");
    if (embeddings == body.end() || !embeddings->is_array()) malformed("no embeddings array");
    std::vector<EmbeddingVector> out;
    for (const json& e : *embeddings) {
      if (!e.is_object() || !e.contains("values")) malformed("embedding lacks 'values'");
      out.push_back(to_vector(e["values"]));
    }
    return out;
  }

  std::optional<HttpRequest> token_request(const std::string&, const std::optional<std::string>&,
                                           std::string_view, std::string_view) const override {
    return std::nullopt;
  }

 private:
  static HttpRequest make(std::string url, const std::optional<std::string>& key, const json& body) {
    HttpRequest req;
    req.url = std::move(url);
    if (key) req.headers.emplace_back("x-goog-api-key", *key);
    req.body = body.dump();
    return req;
  }
};

std::chrono::milliseconds parse_retry_after(const std::optional<std::string>& value) {
  if (!value) return std::chrono::milliseconds::zero();
  const std::string v = trim(*value);
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      v.size() > 6) {
    return std::chrono::milliseconds::zero();
  }
  return std::chrono::seconds(std::stol(v));
}

constexpr std::chrono::milliseconds kMaxBackoff{60'000};

class HttpProvider final : public Provider {
 public:
  HttpProvider(ProviderConfig config, ProviderDeps deps)
      : config_(std::move(config)),
        deps_(std::move(deps)),
        base_(strip_trailing_slash(config_.base_url)),
        limiter_(config_.rate_limit_rpm, TokenBucket::default_burst(config_.rate_limit_rpm)) {
    if (config_.kind == ProviderKind::kGeminiStyle) {
      adapter_ = std::make_unique<GeminiAdapter>();
    } else {
      adapter_ = std::make_unique<OpenAIAdapter>();
    }
  }

  const std::string& name() const override { return config_.name; }
  ProviderKind kind() const override { return config_.kind; }

 protected:
  CompletionResult do_complete(std::string_view prompt, const ImageAttachment* image,
                               const GenerationParams& params) override {
    const auto key = credential();
    Sent sent = send(adapter_->chat_request(base_, key, prompt, image, params));
    CompletionResult r = adapter_->parse_chat(sent.body);
    r.latency_s = sent.latency_s;
    r.attempts = sent.attempts;
    return r;
  }

  std::vector<EmbeddingVector> do_embed_sentence(std::span<const std::string> texts,
                                                 std::string_view model_id) override {
    const auto key = credential();
    return adapter_->parse_embed(send(adapter_->embed_request(base_, key, texts, model_id)).body);
  }

  TokenEmbeddingSet do_embed_tokens(std::string_view text, std::string_view model_id) override {
    const auto key = credential();
    auto req = adapter_->token_request(base_, key, text, model_id);
    if (!req) {
      throw ProviderError(ProviderErrorKind::kUnsupported,
                          "provider '" + config_.name + "' (" + std::string(to_string(config_.kind)) +
                              ") does not offer token embeddings");
    }
    const json body = send(std::move(*req)).body;
    const auto tokens = body.find("tokens");
    const auto vectors = body.find("embeddings");
    if (tokens == body.end() || vectors == body.end() || !tokens->is_array() || !vectors->is_array()) {
      malformed("token embedding response needs 'tokens' and 'embeddings' arrays");
    }
    std::vector<std::string> toks;
    for (const json& t : *tokens) {
      if (!t.is_string()) malformed("token is not a string");
      toks.push_back(t.get<std::string>());
    }
    std::vector<EmbeddingVector> vecs;
    for (const json& v : *vectors) vecs.push_back(to_vector(v));
    try {
      return TokenEmbeddingSet(std::move(toks), std::move(vecs));
    } catch (const MetricError& e) {
      malformed(e.what());
    }
  }

 private:
  struct Sent {
    json body;
    double latency_s = 0.0;
    int attempts = 0;
  };

  std::optional<std::string> credential() const {
    if (config_.credential_ref.empty()) return std::nullopt;
    std::optional<std::string> value;
    if (deps_.getenv) {
      value = deps_.getenv(config_.credential_ref);
    } else if (const char* v = std::getenv(config_.credential_ref.c_str())) {
      value = std::string(v);
    }
    if (!value || value->empty()) {
      throw ProviderError(ProviderErrorKind::kAuth, "provider '" + config_.name +
                                                        "': credential environment variable " +
                                                        config_.credential_ref + " is not set");
    }
    return value;
  }

  void sleep_for(std::chrono::milliseconds d) const {
    if (deps_.sleep) {
      deps_.sleep(d);
    } else {
      std::this_thread::sleep_for(d);
    }
  }

  Sent send(HttpRequest req) {
    req.timeout = config_.timeout;
    req.headers.emplace_back("Content-Type", "application/json");
    const int max_attempts = config_.retry.max_attempts;
    std::string last_error;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
      limiter_.acquire();
      std::chrono::milliseconds retry_after{0};
      const auto start = Clock::now();
      try {
        HttpResponse res = deps_.transport->post(req);
        const double latency = std::chrono::duration<double>(Clock::now() - start).count();
        if (res.status >= 200 && res.status < 300) {
          json body = json::parse(res.body, nullptr, false);
          if (body.is_discarded()) malformed("body is not JSON");
          return Sent{std::move(body), latency, attempt};
        }
        if (res.status == 401 || res.status == 403) {
          throw ProviderError(ProviderErrorKind::kAuth,
                              "provider '" + config_.name + "' rejected credentials (HTTP " +
                                  std::to_string(res.status) + ")",
                              attempt);
        }
        if (res.status != 429 && res.status < 500) {
          throw ProviderError(ProviderErrorKind::kRejected,
                              "provider '" + config_.name + "' rejected request (HTTP " +
                                  std::to_string(res.status) + "): " + res.body.substr(0, 300),
                              attempt);
        }
        last_error = "HTTP " + std::to_string(res.status);
        retry_after = parse_retry_after(res.retry_after);
      } catch (const TransportError& e) {
        last_error = e.what();
      }
      if (attempt == max_attempts) break;
      std::chrono::milliseconds backoff = config_.retry.base_backoff * (1LL << std::min(attempt - 1, 20));
      backoff = std::min(std::max(backoff, retry_after), kMaxBackoff);
      spdlog::warn("provider '{}': attempt {}/{} failed ({}); retrying in {} ms", config_.name,
                   attempt, max_attempts, last_error, backoff.count());
      sleep_for(backoff);
    }
    throw ProviderError(ProviderErrorKind::kTransientExhausted,
                        "provider '" + config_.name + "' failed after " + std::to_string(max_attempts) +
                            " attempt(s); last error: " + last_error,
                        max_attempts);
  }

  ProviderConfig config_;
  ProviderDeps deps_;
  std::string base_;
  TokenBucket limiter_;
  std::unique_ptr<WireAdapter> adapter_;
};

}  // namespace

std::shared_ptr<Provider> make_http_provider(const ProviderConfig& config, ProviderDeps deps) {
  config.validate();
  if (!is_live(config.kind)) {
    throw ConfigError("provider '" + config.name + "' is not an HTTP provider kind");
  }
  if (!deps.transport) deps.transport = make_default_transport();
  return std::make_shared<HttpProvider>(config, std::move(deps));
}

}  // namespace hazlens
