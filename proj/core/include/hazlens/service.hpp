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

// JSON-over-HTTP API for the review console.
//
//   GET  /api/health
//   GET  /api/models
//   POST /api/prompt/engineer        {"guidelines": [...], "mode"?: "meta"|"deterministic"}
//   GET  /api/prompts/{id}
//   POST /api/assess                 multipart: image, prompt_id?, model_id
//   GET  /api/records
//   GET  /api/records/{id}
//   PUT  /api/records/{id}           {"ground_truth"?, "review_status"?, "failure_labels"?, "notes"?}
//   GET  /api/records/{id}/image
//   POST /api/runs                   {"models"?: [...]}
//   GET  /api/runs/{id}
//
// Errors are {"error": "..."} with a 4xx/5xx status.

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "hazlens/config.hpp"

namespace hazlens {

struct ServiceOptions {
  HarnessConfig config;
  RegistryOptions registry;
  /// Empty means config.dataset.
  std::filesystem::path dataset;
  /// Empty means config.media_dir. Uploaded images, engineered prompts and
  /// finished runs are stored here.
  std::filesystem::path media_dir;
};

class Service {
 public:
  /// Loads the dataset; throws DatasetError or ConfigError.
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws Error on failure.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void run();
  /// Safe to call from any thread. Waits for background runs to finish.
  void stop();

  const ProviderRegistry& registry() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hazlens
