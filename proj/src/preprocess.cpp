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

#include "magprint/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "magprint/text_io.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "preprocess";

double unbiased_variance(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0);
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  return m;
}

}  // namespace

void validate_vt_config(const VtConfig& cfg) {
  if (cfg.window_len < 2) throw Error(Errc::InvalidSpec, std::string(kModule), "window_len must be >= 2");
  if (cfg.baseline_len < cfg.window_len) {
    throw Error(Errc::InvalidSpec, std::string(kModule), "baseline_len must be >= window_len");
  }
  if (!(cfg.threshold_factor > 1.0)) {
    throw Error(Errc::InvalidSpec, std::string(kModule), "threshold_factor must be > 1");
  }
}

std::vector<double> sliding_variance(std::span<const double> signal, std::size_t window) {
  if (window < 2 || signal.size() < window) return {};
  std::vector<double> out(signal.size() - window + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = unbiased_variance(signal.subspan(i, window));
  return out;
}

double baseline_variance(std::span<const double> signal, std::size_t baseline_len) {
  std::vector<double> blocks;
  for (std::size_t i = 0; i + baseline_len <= signal.size(); i += baseline_len) {
    blocks.push_back(unbiased_variance(signal.subspan(i, baseline_len)));
  }
  if (blocks.empty()) return 0.0;
  return median_of(std::move(blocks));
}

std::vector<Detection> variance_trajectory(std::span<const double> signal, const VtConfig& cfg) {
  validate_vt_config(cfg);
  if (signal.size() < cfg.baseline_len + cfg.window_len) {
    throw Error(Errc::SignalTooShort, std::string(kModule),
                "signal has " + std::to_string(signal.size()) + " samples, need at least " +
                    std::to_string(cfg.baseline_len + cfg.window_len));
  }
  const auto var = sliding_variance(signal, cfg.window_len);
  double peak = 0.0;
  for (double v : signal) peak = std::max(peak, std::abs(v));
  // Round-off on a flat signal must not register as a rise.
  const double floor = 1e-18 * (1.0 + peak * peak);
  const double threshold = std::max(cfg.threshold_factor * baseline_variance(signal, cfg.baseline_len), floor);

  std::vector<Detection> runs;
  std::size_t i = 0;
  while (i < var.size()) {
    if (!(var[i] > threshold)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < var.size() && var[j + 1] > threshold) ++j;
    // A run's detection covers the samples of all its windows.
    Detection d{i, j + cfg.window_len};
    if (!runs.empty() && i - (runs.back().end - cfg.window_len) - 1 < cfg.window_len) {
      runs.back().end = d.end;
    } else {
      runs.push_back(d);
    }
    i = j + 1;
  }
  if (runs.empty()) {
    throw Error(Errc::NoResponseDetected, std::string(kModule),
                "variance never exceeds the threshold");
  }
  return runs;
}

Segmentation segment_responses(std::span<const double> signal, const ScheduleAlignment* alignment,
                               const VtConfig& cfg, const SegmentOptions& options,
                               std::string device_id, std::string session_id) {
  Segmentation out;
  auto& report = out.report;
  const auto detections = variance_trajectory(signal, cfg);
  report.detections = detections.size();

  struct Kept {
    Detection det;
    int index;
  };
  std::vector<Kept> kept;

  if (alignment != nullptr) {
    const auto bursts = alignment->schedule.burst_onsets_ms();
    const double samples_per_ms = alignment->sample_rate_hz / 1000.0;
    std::vector<double> burst_pos(bursts.size());
    for (std::size_t b = 0; b < bursts.size(); ++b) {
      burst_pos[b] = (bursts[b] - alignment->t0_ms) * samples_per_ms;
    }
    double min_spacing = std::numeric_limits<double>::infinity();
    for (std::size_t b = 1; b < burst_pos.size(); ++b) {
      min_spacing = std::min(min_spacing, burst_pos[b] - burst_pos[b - 1]);
    }
    const double tolerance = std::isinf(min_spacing) ? static_cast<double>(signal.size()) : 0.5 * min_spacing;

    // Every detection rising within the tolerance of a burst onset is part of
    // that burst's response (rising and falling edges, ringing).
    std::vector<std::optional<Detection>> merged(bursts.size());
    for (const auto& det : detections) {
      // The first active window ends on the onset sample.
      const double rise = static_cast<double>(det.start + cfg.window_len - 1);
      auto it = std::upper_bound(burst_pos.begin(), burst_pos.end(), rise + tolerance);
      if (it == burst_pos.begin() || rise - *(it - 1) > tolerance) {
        ++report.spurious_detections;
        continue;
      }
      auto& slot = merged[static_cast<std::size_t>(it - 1 - burst_pos.begin())];
      if (slot) {
        ++report.merged_detections;
        slot->start = std::min(slot->start, det.start);
        slot->end = std::max(slot->end, det.end);
      } else {
        slot = det;
      }
    }
    for (std::size_t b = 0; b < bursts.size(); ++b) {
      if (!merged[b]) {
        report.missed_bursts.push_back(b);
      } else {
        kept.push_back({*merged[b], static_cast<int>(b)});
      }
    }
    report.expected = bursts.size();
  } else {
    for (std::size_t d = 0; d < detections.size(); ++d) kept.push_back({detections[d], static_cast<int>(d)});
  }

  if (kept.empty()) {
    throw Error(Errc::NoResponseDetected, std::string(kModule), "no detection matches the schedule");
  }

  std::size_t length = 0;
  if (options.segment_length) {
    length = *options.segment_length;
  } else {
    std::vector<double> lengths;
    for (const auto& k : kept) lengths.push_back(static_cast<double>(k.det.length()));
    length = static_cast<std::size_t>(std::lround(median_of(std::move(lengths))));
  }
  if (length == 0) throw Error(Errc::InvalidSpec, std::string(kModule), "segment length must be > 0");
  report.segment_length = length;

  for (const auto& k : kept) {
    ResponseSegment seg;
    seg.device_id = device_id;
    seg.session_id = session_id;
    seg.index = k.index;
    seg.onset_sample = k.det.start;
    seg.samples.reserve(length);
    for (std::size_t s = 0; s < length; ++s) {
      std::size_t pos = k.det.start + s;
      seg.samples.push_back(pos < signal.size() ? signal[pos] : signal.back());
    }
    out.segments.push_back(std::move(seg));
  }

  if (report.expected && out.segments.size() != *report.expected) {
    report.count_mismatch = true;
    report.warnings.push_back("SegmentCountMismatch: " + std::to_string(out.segments.size()) +
                              " segments for " + std::to_string(*report.expected) + " bursts (" +
                              std::to_string(report.missed_bursts.size()) + " missed, " +
                              std::to_string(report.spurious_detections) + " unmatched detections)");
  }
  return out;
}

std::vector<double> rms_normalize(std::span<const double> samples) {
  double ss = 0.0;
  for (double v : samples) ss += v * v;
  if (samples.empty() || !(ss > 0)) {
    throw Error(Errc::ZeroSegment, std::string(kModule), "segment has zero RMS");
  }
  const double rms = std::sqrt(ss / static_cast<double>(samples.size()));
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = samples[i] / rms;
  return out;
}

void normalize_segments(std::vector<ResponseSegment>& segments) {
  for (auto& s : segments) s.samples = rms_normalize(s.samples);
}

std::string format_segments(const std::vector<ResponseSegment>& segments) {
  std::size_t length = 0;
  for (const auto& s : segments) length = std::max(length, s.samples.size());
  std::string out = "device_id,session_id,index";
  for (std::size_t i = 0; i < length; ++i) out += ",sample_" + std::to_string(i);
  out += '\n';
  for (const auto& s : segments) {
    if (s.samples.size() != length) {
      throw Error(Errc::InvalidSpec, std::string(kModule), "segments must share one length");
    }
    out += s.device_id + "," + s.session_id + "," + std::to_string(s.index);
    for (double v : s.samples) {
      out += ',';
      out += format_exact(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<ResponseSegment> parse_segments(std::string_view csv) {
  auto lines = split_lines(csv);
  std::vector<ResponseSegment> out;
  if (lines.empty() || trim(lines[0]).empty()) return out;
  auto header = split_csv(lines[0]);
  if (header.size() < 4 || header[0] != "device_id" || header[1] != "session_id" || header[2] != "index") {
    throw Error(Errc::ParseError, std::string(kModule), "line 1: bad segment header");
  }
  const std::size_t length = header.size() - 3;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto f = split_csv(lines[i]);
    const std::string where = "line " + std::to_string(i + 1);
    if (f.size() != header.size()) {
      throw Error(Errc::ParseError, std::string(kModule), where + ": expected " +
                                                              std::to_string(header.size()) + " columns");
    }
    ResponseSegment s;
    s.device_id = std::string(f[0]);
    s.session_id = std::string(f[1]);
    s.index = static_cast<int>(parse_int_field(f[2], kModule, where));
    s.samples.reserve(length);
    for (std::size_t c = 3; c < f.size(); ++c) s.samples.push_back(parse_double_field(f[c], kModule, where));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace magprint
