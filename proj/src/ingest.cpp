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

#include "magprint/ingest.hpp"

#include <algorithm>
#include <cmath>

#include "magprint/text_io.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "ingest";
constexpr std::string_view kTraceHeader = "t_ms,bx_ut,by_ut,bz_ut";
constexpr std::string_view kManifestHeader = "session_id,device_id,day_label,waveform_id,trace_path";

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw Error(Errc::ParseError, std::string(kModule), "line " + std::to_string(line) + ": " + what);
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

Trace parse_trace(std::string_view csv, std::string device_id, std::string session_id,
                  Warnings* warnings) {
  if (csv.size() >= 3 && static_cast<unsigned char>(csv[0]) == 0xEF) csv.remove_prefix(3);  // BOM
  auto lines = split_lines(csv);
  std::size_t first = 0;
  while (first < lines.size() && is_blank(lines[first])) ++first;
  if (first == lines.size()) throw Error(Errc::EmptyTrace, std::string(kModule), "no header row");
  if (trim(lines[first]) != kTraceHeader) {
    parse_error(static_cast<int>(first + 1), "expected header '" + std::string(kTraceHeader) + "'");
  }

  Trace trace;
  trace.device_id = std::move(device_id);
  trace.session_id = std::move(session_id);
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const int line_no = static_cast<int>(i + 1);
    auto fields = split_csv(lines[i]);
    if (fields.size() != 4) parse_error(line_no, "expected 4 columns, got " + std::to_string(fields.size()));
    double v[4];
    static constexpr const char* kNames[4] = {"t_ms", "bx_ut", "by_ut", "bz_ut"};
    for (int c = 0; c < 4; ++c) {
      if (!try_parse_double(fields[c], v[c]) || !std::isfinite(v[c])) {
        parse_error(line_no, std::string("column ") + kNames[c] + ": invalid number '" +
                                 std::string(fields[c]) + "'");
      }
    }
    if (!trace.samples.empty() && !(v[0] > trace.samples.back().t_ms)) {
      throw Error(Errc::NonMonotonicTimestamps, std::string(kModule),
                  "line " + std::to_string(line_no) + ": timestamp " + std::string(fields[0]) +
                      " does not increase");
    }
    trace.samples.push_back({v[0], v[1], v[2], v[3]});
  }
  if (trace.samples.empty()) throw Error(Errc::EmptyTrace, std::string(kModule), "no samples");

  if (trace.samples.size() >= 2) {
    std::vector<double> spacing(trace.samples.size() - 1);
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
      spacing[i - 1] = trace.samples[i].t_ms - trace.samples[i - 1].t_ms;
    }
    std::vector<double> sorted = spacing;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double median = sorted[sorted.size() / 2];
    if (sorted.size() % 2 == 0) {
      double lower = *std::max_element(sorted.begin(), sorted.begin() + sorted.size() / 2);
      median = 0.5 * (median + lower);
    }
    trace.sample_rate_hz = 1000.0 / median;

    std::size_t jittered = 0;
    for (std::size_t i = 0; i < spacing.size(); ++i) {
      double rel = std::abs(spacing[i] - median) / median;
      if (rel > kMaxSamplingJitter + 1e-12) {
        throw Error(Errc::IrregularSampling, std::string(kModule),
                    "spacing " + format_exact(spacing[i]) + " ms at sample " + std::to_string(i + 1) +
                        " deviates more than 20% from the median " + format_exact(median) + " ms");
      }
      if (rel > 1e-6) ++jittered;
    }
    if (jittered > 0) {
      warn(warnings, std::to_string(jittered) + " sample spacings deviate from the nominal " +
                         format_exact(median) + " ms");
    }
  }
  return trace;
}

Trace load_trace(const std::filesystem::path& path, std::string device_id, std::string session_id,
                 Warnings* warnings) {
  return parse_trace(read_text_file(path, kModule), std::move(device_id), std::move(session_id),
                     warnings);
}

std::string format_trace(const Trace& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  out.reserve(trace.samples.size() * 40);
  for (const auto& s : trace.samples) {
    out += format_exact(s.t_ms);
    out += ',';
    out += format_fixed(s.bx, 6);
    out += ',';
    out += format_fixed(s.by, 6);
    out += ',';
    out += format_fixed(s.bz, 6);
    out += '\n';
  }
  return out;
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  write_text_file(path, format_trace(trace), kModule);
}

Channel parse_channel(std::string_view name) {
  if (name == "magnitude") return Channel::Magnitude;
  if (name == "x") return Channel::X;
  if (name == "y") return Channel::Y;
  if (name == "z") return Channel::Z;
  throw Error(Errc::InvalidSpec, std::string(kModule),
              "unknown channel '" + std::string(name) + "' (expected magnitude, x, y or z)");
}

std::string_view channel_name(Channel channel) {
  switch (channel) {
    case Channel::Magnitude: return "magnitude";
    case Channel::X: return "x";
    case Channel::Y: return "y";
    case Channel::Z: return "z";
  }
  return "magnitude";
}

std::vector<double> magnitude(const Trace& trace) {
  std::vector<double> out;
  out.reserve(trace.samples.size());
  for (const auto& s : trace.samples) out.push_back(std::sqrt(s.bx * s.bx + s.by * s.by + s.bz * s.bz));
  return out;
}

std::vector<double> extract_channel(const Trace& trace, Channel channel) {
  if (channel == Channel::Magnitude) return magnitude(trace);
  std::vector<double> out;
  out.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    out.push_back(channel == Channel::X ? s.bx : channel == Channel::Y ? s.by : s.bz);
  }
  return out;
}

std::vector<SessionManifest> parse_manifest(std::string_view csv,
                                            const std::filesystem::path& base_dir,
                                            Warnings* warnings) {
  std::vector<SessionManifest> entries;
  auto lines = split_lines(csv);
  std::size_t first = 0;
  while (first < lines.size() && is_blank(lines[first])) ++first;
  if (first == lines.size()) {
    warn(warnings, "manifest is empty");
    return entries;
  }
  if (trim(lines[first]) != kManifestHeader) {
    parse_error(static_cast<int>(first + 1), "expected header '" + std::string(kManifestHeader) + "'");
  }
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const int line_no = static_cast<int>(i + 1);
    auto f = split_csv(lines[i]);
    if (f.size() != 5) parse_error(line_no, "expected 5 columns, got " + std::to_string(f.size()));
    for (const auto& field : f) {
      if (field.empty()) parse_error(line_no, "empty field");
    }
    SessionManifest m{std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]),
                      std::filesystem::path(std::string(f[4]))};
    if (m.trace_path.is_relative()) m.trace_path = base_dir / m.trace_path;
    if (!std::filesystem::exists(m.trace_path)) {
      throw Error(Errc::MissingTraceFile, std::string(kModule),
                  "line " + std::to_string(line_no) + ": trace file not found: " + m.trace_path.string());
    }
    entries.push_back(std::move(m));
  }
  if (entries.empty()) warn(warnings, "manifest lists no sessions");
  return entries;
}

std::vector<SessionManifest> load_manifest(const std::filesystem::path& path, Warnings* warnings) {
  return parse_manifest(read_text_file(path, kModule), path.parent_path(), warnings);
}

std::string format_manifest(const std::vector<SessionManifest>& entries,
                            const std::filesystem::path& base_dir) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& m : entries) {
    std::filesystem::path p = m.trace_path;
    if (!base_dir.empty()) {
      auto rel = p.lexically_relative(base_dir);
      if (!rel.empty() && rel.native().rfind("..", 0) != 0) p = rel;
    }
    out += m.session_id + "," + m.device_id + "," + m.day_label + "," + m.waveform_id + "," +
           p.generic_string() + "\n";
  }
  return out;
}

}  // namespace magprint
