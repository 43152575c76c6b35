// Copyright 2026 The magprint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
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
#include <vector>

namespace magprint {

/// One `key = value` entry of a flat key-value file.
struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// anything else is a ParseError naming the line.
std::vector<KeyValue> parse_key_values(std::string_view text, std::string_view module);

std::string read_text_file(const std::filesystem::path& path, std::string_view module);
void write_text_file(const std::filesystem::path& path, std::string_view contents,
                     std::string_view module);
void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes,
                       std::string_view module);

std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split_csv(std::string_view line);
std::string_view trim(std::string_view s);

/// Strict numeric parsing: the whole (trimmed) field must be consumed.
bool try_parse_double(std::string_view field, double& out);
bool try_parse_int(std::string_view field, long long& out);

double parse_double_field(std::string_view field, std::string_view module, std::string_view what);
long long parse_int_field(std::string_view field, std::string_view module, std::string_view what);

/// Shortest round-trip representation (17 significant digits when needed).
std::string format_exact(double v);
/// Fixed-point representation with the given number of decimals.
std::string format_fixed(double v, int decimals);

}  // namespace magprint
