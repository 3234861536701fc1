// Copyright 2026-present the metapop project
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
#include <filesystem>
#include <string>
#include <string_view>

namespace metapop {

/// Shortest round-trip decimal form of a double (locale-independent, stable
/// across reruns, parses back bit-exactly).
std::string format_double(double value);

double parse_double(std::string_view text);

/// 64-bit FNV-1a over bytes, as a fixed-width hex string. Used for config and
/// artifact content identity, not security.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
std::string hash_file_hex(const std::filesystem::path& path);

}  // namespace metapop
