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

#include "hazlens/stub_provider.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hazlens/encoding.hpp"

namespace hazlens {

using json = nlohmann::json;

namespace {

ProviderErrorKind parse_error_kind(const std::string& name) {
  for (auto k : {ProviderErrorKind::kAuth, ProviderErrorKind::kTransientExhausted,
                 ProviderErrorKind::kMalformedResponse, ProviderErrorKind::kRejected,
                 ProviderErrorKind::kPrecondition, ProviderErrorKind::kUnsupported,
                 ProviderErrorKind::kCacheMiss}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown stub failure kind '" + name + "'");
}

std::map<std::string, std::vector<double>> vector_table(const json& j, const char* key) {
  std::map<std::string, std::vector<double>> out;
  if (!j.contains(key)) return out;
  for (const auto& [k, v] : j.at(key).items()) out.emplace(k, v.get<std::vector<double>>());
  return out;
}

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

StubSpec stub_spec_from_json(const json& j) {
  StubSpec spec;
  if (j.contains("completions")) {
    for (const json& r : j.at("completions")) {
      StubRule rule;
      if (r.contains("image_sha256")) rule.image_sha256 = r.at("image_sha256").get<std::string>();
      if (r.contains("prompt_sha256")) rule.prompt_sha256 = r.at("prompt_sha256").get<std::string>();
      if (r.contains("prompt_contains")) rule.prompt_contains = r.at("prompt_contains").get<std::string>();
      rule.text = r.value("text", std::string{});
      if (r.contains("fail")) rule.fail = parse_error_kind(r.at("fail").get<std::string>());
      spec.rules.push_back(std::move(rule));
    }
  }
  if (j.contains("default_text") && !j.at("default_text").is_null()) {
    spec.default_text = j.at("default_text").get<std::string>();
  }
  spec.latency_s = j.value("latency_s", 0.0);
  spec.latency_jitter_s = j.value("latency_jitter_s", 0.0);
  if (spec.latency_s < 0 || spec.latency_jitter_s < 0) throw ConfigError("stub latency must be non-negative");
  if (j.contains("embedding")) {
    const json& e = j.at("embedding");
    spec.embedding_dim = e.value("dim", spec.embedding_dim);
    spec.word_vectors = vector_table(e, "words");
    spec.sentence_vectors = vector_table(e, "sentences");
  }
  if (spec.embedding_dim == 0) throw ConfigError("stub embedding dim must be >= 1");
  return spec;
}

StubSpec load_stub_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read stub file " + path.string());
  try {
    return stub_spec_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("invalid stub file " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> stub_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

StubProvider::StubProvider(std::string name, StubSpec spec)
    : name_(std::move(name)), spec_(std::move(spec)) {
  for (const auto& [w, v] : spec_.word_vectors) {
    if (v.size() != spec_.embedding_dim) {
      throw ConfigError("stub word vector '" + w + "' has dimension " + std::to_string(v.size()) +
                        ", expected " + std::to_string(spec_.embedding_dim));
    }
  }
}

void StubProvider::reset_counters() noexcept {
  complete_calls_ = 0;
  embed_calls_ = 0;
}

std::vector<double> StubProvider::word_vector(const std::string& word) const {
  if (auto it = spec_.word_vectors.find(word); it != spec_.word_vectors.end()) return it->second;
  // Non-negative entries drawn from chained digests of the word.
  std::vector<double> v;
  v.reserve(spec_.embedding_dim);
  std::string block = sha256_hex(word);
  while (v.size() < spec_.embedding_dim) {
    for (std::size_t i = 0; i + 1 < block.size() && v.size() < spec_.embedding_dim; i += 2) {
      const int byte = std::stoi(block.substr(i, 2), nullptr, 16);
      v.push_back(0.01 + byte / 255.0);
    }
    block = sha256_hex(block);
  }
  return v;
}

CompletionResult StubProvider::do_complete(std::string_view prompt, const ImageAttachment* image,
                                           const GenerationParams&) {
  ++complete_calls_;
  std::optional<std::string> prompt_hash;
  double latency = spec_.latency_s;
  if (spec_.latency_jitter_s > 0) {
    const std::string key = sha256_hex(std::string(prompt) + '\n' + (image ? image->content_hash : ""));
    latency += spec_.latency_jitter_s * static_cast<double>(std::stoul(key.substr(0, 6), nullptr, 16)) / 16777216.0;
  }
  for (const StubRule& rule : spec_.rules) {
    if (rule.image_sha256 && (!image || image->content_hash != *rule.image_sha256)) continue;
    if (rule.prompt_contains && prompt.find(*rule.prompt_contains) == std::string_view::npos) continue;
    if (rule.prompt_sha256) {
      if (!prompt_hash) prompt_hash = sha256_hex(prompt);
      if (*prompt_hash != *rule.prompt_sha256) continue;
    }
    if (rule.fail) {
      throw ProviderError(*rule.fail, "stub '" + name_ + "' configured to fail with " +
                                          std::string(to_string(*rule.fail)));
    }
    return CompletionResult{rule.text, latency, std::nullopt, 1};
  }
  if (spec_.default_text) return CompletionResult{*spec_.default_text, latency, std::nullopt, 1};
  throw ProviderError(ProviderErrorKind::kRejected,
                      "stub '" + name_ + "' has no canned completion for this request");
}

std::vector<EmbeddingVector> StubProvider::do_embed_sentence(std::span<const std::string> texts,
                                                             std::string_view) {
  ++embed_calls_;
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) {
    if (auto it = spec_.sentence_vectors.find(text); it != spec_.sentence_vectors.end()) {
      out.emplace_back(it->second);
      continue;
    }
    std::vector<std::string> words = stub_tokenize(text);
    if (words.empty()) words.push_back(text);
    std::vector<double> sum(spec_.embedding_dim, 0.0);
    for (const std::string& w : words) {
      const std::vector<double> v = word_vector(w);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
    }
    for (double& x : sum) x /= static_cast<double>(words.size());
    out.emplace_back(std::move(sum));
  }
  return out;
}

TokenEmbeddingSet StubProvider::do_embed_tokens(std::string_view text, std::string_view) {
  ++embed_calls_;
  std::vector<std::string> words = stub_tokenize(text);
  if (words.empty()) {
    throw ProviderError(ProviderErrorKind::kPrecondition, "text has no word tokens");
  }
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(words.size());
  for (const std::string& w : words) vectors.emplace_back(word_vector(w));
  return TokenEmbeddingSet(std::move(words), std::move(vectors));
}

}  // namespace hazlens
