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

#include "hazlens/rate_limiter.hpp"

#include <algorithm>
#include <thread>

#include "hazlens/error.hpp"

namespace hazlens {

TokenBucket::TokenBucket(double requests_per_minute, double burst, NowFn now)
    : per_second_(requests_per_minute / 60.0),
      capacity_(burst),
      tokens_(burst),
      now_(std::move(now)),
      last_(now_()) {
  if (!(requests_per_minute > 0.0)) throw ConfigError("rate limit must be > 0 requests per minute");
  if (!(burst >= 1.0)) throw ConfigError("rate limit burst must be >= 1");
}

double TokenBucket::default_burst(double requests_per_minute) {
  return std::max(1.0, requests_per_minute / 60.0);
}

void TokenBucket::refill(Clock::time_point now) {
  if (now <= last_) return;
  const double elapsed = std::chrono::duration<double>(now - last_).count();
  tokens_ = std::min(capacity_, tokens_ + elapsed * per_second_);
  last_ = now;
}

TokenBucket::Clock::duration TokenBucket::try_acquire() {
  std::lock_guard lock(mu_);
  refill(now_());
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return Clock::duration::zero();
  }
  const double missing = 1.0 - tokens_;
  const auto wait = std::chrono::duration<double>(missing / per_second_);
  return std::max(Clock::duration(1), std::chrono::ceil<Clock::duration>(wait));
}

void TokenBucket::acquire() {
  for (;;) {
    const auto wait = try_acquire();
    if (wait == Clock::duration::zero()) return;
    std::this_thread::sleep_for(wait);
  }
}

}  // namespace hazlens
