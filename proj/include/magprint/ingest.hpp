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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "magprint/simulator.hpp"

namespace magprint {

/// Spacing deviation (relative to the median) accepted with a warning.
inline constexpr double kMaxSamplingJitter = 0.20;

/// Parses a `t_ms,bx_ut,by_ut,bz_ut` CSV. The sample rate is inferred from
/// the median timestamp spacing.
Trace parse_trace(std::string_view csv, std::string device_id = {}, std::string session_id = {},
                  Warnings* warnings = nullptr);
Trace load_trace(const std::filesystem::path& path, std::string device_id = {},
                 std::string session_id = {}, Warnings* warnings = nullptr);

/// Timestamps are written exactly; field components with six decimals.
std::string format_trace(const Trace& trace);
void save_trace(const Trace& trace, const std::filesystem::path& path);

enum class Channel { Magnitude, X, Y, Z };

Channel parse_channel(std::string_view name);
std::string_view channel_name(Channel channel);

/// Per-sample field magnitude sqrt(bx^2 + by^2 + bz^2).
std::vector<double> magnitude(const Trace& trace);
std::vector<double> extract_channel(const Trace& trace, Channel channel);

struct SessionManifest {
  std::string session_id;
  std::string device_id;
  std::string day_label;
  std::string waveform_id;
  std::filesystem::path trace_path;
};

/// Reads a manifest CSV. Relative trace paths resolve against the manifest's
/// directory; every referenced file must exist (MissingTraceFile otherwise).
std::vector<SessionManifest> load_manifest(const std::filesystem::path& path,
                                           Warnings* warnings = nullptr);
std::vector<SessionManifest> parse_manifest(std::string_view csv,
                                            const std::filesystem::path& base_dir,
                                            Warnings* warnings = nullptr);
/// Trace paths are written relative to `base_dir` when they live beneath it.
std::string format_manifest(const std::vector<SessionManifest>& entries,
                            const std::filesystem::path& base_dir);

}  // namespace magprint
