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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hazlens {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);

/// Standard (RFC 4648) base64 with padding.
std::string base64_encode(std::span<const std::uint8_t> data);

/// Strict decoder: rejects bad characters, bad padding and non-canonical
/// trailing bits. Returns nullopt on any violation.
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

// Small string helpers shared across modules.
std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool is_blank(std::string_view s);

}  // namespace hazlens
