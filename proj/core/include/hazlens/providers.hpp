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

// Model backends. A Provider turns (prompt, optional image) into a completion
// and texts into embeddings. Live kinds speak HTTP (OpenAI-compatible chat and
// Gemini-style generateContent); the stub and replay kinds never touch the
// network.
//
// Provider handles are safe for concurrent use.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hazlens/error.hpp"
#include "hazlens/metrics.hpp"

namespace hazlens {

struct GenerationParams {
  double temperature = 0.3;
  int max_tokens = 250;
  std::string model_id;

  /// Throws ConfigError on negative temperature or non-positive max_tokens.
  void validate() const;
};

enum class ProviderKind { kOpenAICompatible, kGeminiStyle, kStub, kReplay };

std::string_view to_string(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view name);
inline bool is_live(ProviderKind kind) {
  return kind == ProviderKind::kOpenAICompatible || kind == ProviderKind::kGeminiStyle;
}

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_backoff{1000};
};

struct ProviderConfig {
  std::string name;
  ProviderKind kind = ProviderKind::kStub;
  std::string base_url;
  std::string credential_ref;  // environment variable holding the API key
  std::chrono::milliseconds timeout{120'000};
  RetryPolicy retry;
  double rate_limit_rpm = 60.0;
  std::filesystem::path stub_file;  // kStub only
  std::filesystem::path cache_dir;  // kReplay only

  void validate() const;
};

enum class MediaType { kJpeg, kPng };

std::string_view mime_type(MediaType type);
/// Accepts "jpeg", "jpg", "png" and the matching MIME types.
MediaType parse_media_type(std::string_view name);
/// From a file extension; throws ProviderError(kUnsupported) otherwise.
MediaType media_type_for_path(const std::filesystem::path& path);

struct ImageAttachment {
  MediaType media_type = MediaType::kPng;
  std::string data;          // base64
  std::string content_hash;  // sha256 hex of the raw bytes
};

/// Throws ProviderError(kPrecondition) on empty input.
ImageAttachment encode_image(std::span<const std::uint8_t> bytes, MediaType media_type);
ImageAttachment read_image_file(const std::filesystem::path& path);

struct TokenUsage {
  int prompt = 0;
  int completion = 0;
  bool operator==(const TokenUsage&) const = default;
};

struct CompletionResult {
  std::string text;
  double latency_s = 0.0;  // transport call only
  std::optional<TokenUsage> token_usage;
  int attempts = 1;
};

nlohmann::json completion_to_json(const CompletionResult& c);
CompletionResult completion_from_json(const nlohmann::json& j);

enum class ProviderErrorKind {
  kAuth,
  kTransientExhausted,
  kMalformedResponse,
  kRejected,
  kPrecondition,
  kUnsupported,
  kCacheMiss,
};

std::string_view to_string(ProviderErrorKind kind);

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, std::string message, int attempts = 0)
      : Error(std::move(message)), kind_(kind), attempts_(attempts) {}
  ProviderErrorKind kind() const noexcept { return kind_; }
  int attempts() const noexcept { return attempts_; }

 private:
  ProviderErrorKind kind_;
  int attempts_;
};

/// Base class for every backend. Public entry points validate inputs and
/// outputs; subclasses implement the do_* hooks.
class Provider {
 public:
  virtual ~Provider() = default;

  CompletionResult complete(std::string_view prompt, const ImageAttachment* image,
                            const GenerationParams& params);
  /// One vector per input, same dimension, order preserved.
  std::vector<EmbeddingVector> embed_sentence(std::span<const std::string> texts,
                                              std::string_view model_id);
  /// Token vectors are unit-normalized.
  TokenEmbeddingSet embed_tokens(std::string_view text, std::string_view model_id);

  virtual const std::string& name() const = 0;
  virtual ProviderKind kind() const = 0;

 protected:
  virtual CompletionResult do_complete(std::string_view prompt, const ImageAttachment* image,
                                       const GenerationParams& params) = 0;
  virtual std::vector<EmbeddingVector> do_embed_sentence(std::span<const std::string> texts,
                                                         std::string_view model_id) = 0;
  virtual TokenEmbeddingSet do_embed_tokens(std::string_view text, std::string_view model_id) = 0;
};

// ---- HTTP plumbing -------------------------------------------------------

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{120'000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::optional<std::string> retry_after;
};

/// Network-level failure (connect, TLS, timeout). Always retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws TransportError when no HTTP response was obtained.
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (HTTPS via OpenSSL).
std::shared_ptr<HttpTransport> make_default_transport();

/// Injection points for live providers; defaults talk to the real world.
struct ProviderDeps {
  std::shared_ptr<HttpTransport> transport;
  std::function<std::optional<std::string>(const std::string&)> getenv;
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Builds a live (openai_compatible / gemini_style) provider. Stub and
/// replay providers have their own constructors.
std::shared_ptr<Provider> make_http_provider(const ProviderConfig& config, ProviderDeps deps = {});

}  // namespace hazlens
