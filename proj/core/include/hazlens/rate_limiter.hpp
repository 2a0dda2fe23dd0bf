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

#include <chrono>
#include <functional>
#include <mutex>

namespace hazlens {

/// Token bucket refilled continuously at `requests_per_minute`. Thread-safe.
class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;
  using NowFn = std::function<Clock::time_point()>;

  /// `burst` is the bucket capacity; it starts full.
  TokenBucket(double requests_per_minute, double burst, NowFn now = Clock::now);

  /// Takes a token if one is available and returns zero; otherwise returns how
  /// long the caller should wait before trying again.
  Clock::duration try_acquire();

  /// Blocks until a token is taken.
  void acquire();

  /// Capacity used for a provider: about one second's worth of requests.
  static double default_burst(double requests_per_minute);

 private:
  void refill(Clock::time_point now);

  std::mutex mu_;
  double per_second_;
  double capacity_;
  double tokens_;
  NowFn now_;
  Clock::time_point last_;
};

}  // namespace hazlens
