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

#include <stdexcept>
#include <string>
#include <vector>

namespace hazlens {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GuidelineError : public Error {
 public:
  using Error::Error;
};

class PromptError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

class JudgeError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ReportError : public Error {
 public:
  using Error::Error;
};

/// Raised when evaluation is attempted over records still awaiting review.
class DraftGateError : public DatasetError {
 public:
  explicit DraftGateError(std::vector<std::string> draft_ids);

  const std::vector<std::string>& draft_ids() const noexcept { return draft_ids_; }

 private:
  std::vector<std::string> draft_ids_;
};

}  // namespace hazlens
