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
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hazlens/providers.hpp"
#include "hazlens/reportparse.hpp"

namespace hazlens::testing {

inline std::filesystem::path fixture_dir() { return HAZLENS_FIXTURE_DIR; }
inline std::filesystem::path golden_dir() { return HAZLENS_GOLDEN_DIR; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hazlens-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// Copies the fixture dataset (JSONL plus images) into `dir`.
inline std::filesystem::path copy_dataset(const std::filesystem::path& dir, const std::string& jsonl = "dataset.jsonl") {
  std::filesystem::copy(fixture_dir() / "dataset", dir / "dataset", std::filesystem::copy_options::recursive);
  return dir / "dataset" / jsonl;
}

/// Random well-formed report. Field text avoids label keywords.
inline HazardReport random_report(std::mt19937_64& rng, SeverityScale scale = {}) {
  static const char* kWords[] = {"worker", "trench",  "ladder", "edge",   "cable",  "spill",  "dust",
                                 "noise",  "crane",   "sparks", "timber", "guard",  "helmet", "vest",
                                 "open",   "exposed", "near",   "wet",    "loose",  "heavy",  "(PPE)",
                                 "fall",   "risk,",   "zone;",  "1.5m",   "area's", "roof"};
  auto phrase = [&](int lo, int hi) {
    std::uniform_int_distribution<int> len(lo, hi), pick(0, std::size(kWords) - 1);
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += kWords[pick(rng)];
    }
    return s;
  };
  HazardReport r;
  r.summary = phrase(1, 8);
  std::uniform_int_distribution<int> count(0, 5), sev(scale.low, scale.high);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    r.hazards.push_back(HazardRecord{i + 1, phrase(1, 4), sev(rng), phrase(3, 12), phrase(3, 12)});
  }
  return r;
}

/// Transport double: replays scripted responses and counts calls.
class ScriptedTransport : public HttpTransport {
 public:
  struct Step {
    int status = 200;
    std::string body;
    std::optional<std::string> retry_after;
    bool network_error = false;
  };
  explicit ScriptedTransport(std::vector<Step> steps) : steps_(std::move(steps)) {}

  HttpResponse post(const HttpRequest& request) override {
    requests.push_back(request);
    const std::size_t i = calls++;
    const Step& s = steps_.at(std::min(i, steps_.size() - 1));
    if (s.network_error) throw TransportError("connection refused");
    return HttpResponse{s.status, s.body, s.retry_after};
  }

  std::size_t calls = 0;
  std::vector<HttpRequest> requests;

 private:
  std::vector<Step> steps_;
};

inline std::string openai_chat_body(const std::string& text) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}},
                        {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 7}}}}
      .dump();
}

}  // namespace hazlens::testing
