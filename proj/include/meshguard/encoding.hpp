// Copyright MeshGuard Authors. All Rights Reserved.
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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace meshguard {

std::string hex_encode(std::span<const std::uint8_t> bytes);
/// Throws Error(Errc::MalformedDocument) on non-hex input or odd length.
std::vector<std::uint8_t> hex_decode(std::string_view hex);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::string_view bytes);
/// Throws Error(Errc::MalformedDocument) on invalid base64.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Reads a whole file; throws Error(Errc::IoError) when unreadable.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace meshguard
