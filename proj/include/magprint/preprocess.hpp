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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "magprint/error.hpp"
#include "magprint/stimulus.hpp"

namespace magprint {

struct VtConfig {
  std::size_t window_len = 5;
  std::size_t baseline_len = 20;
  double threshold_factor = 5.0;
};

void validate_vt_config(const VtConfig& cfg);

/// Half-open sample range [start, end) of one detected response.
struct Detection {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Unbiased variance of every length-`window` window; entry i covers
/// samples [i, i + window).
std::vector<double> sliding_variance(std::span<const double> signal, std::size_t window);

/// Variance level the trajectory is compared against: the median variance of
/// consecutive non-overlapping `baseline_len` blocks.
double baseline_variance(std::span<const double> signal, std::size_t baseline_len);

/// Windows whose variance exceeds threshold_factor times the baseline are
/// grouped into runs. Runs separated by fewer than window_len quiet windows
/// are merged; a response ends once the variance stays below the threshold
/// for window_len consecutive windows.
std::vector<Detection> variance_trajectory(std::span<const double> signal, const VtConfig& cfg);

struct ResponseSegment {
  std::string device_id;
  std::string session_id;
  int index = 0;
  std::vector<double> samples;
  std::size_t onset_sample = 0;
};

/// Stimulus timing expressed on the trace's sample grid.
struct ScheduleAlignment {
  PulseSchedule schedule;
  double t0_ms = 0.0;
  double sample_rate_hz = 20.0;
};

struct SegmentOptions {
  /// Common segment length; the median detected length when unset.
  std::optional<std::size_t> segment_length;
};

struct SegmentationReport {
  std::size_t detections = 0;
  std::optional<std::size_t> expected;
  std::vector<std::size_t> missed_bursts;
  /// Detections outside every burst's matching window.
  std::size_t spurious_detections = 0;
  /// Extra detections folded into an earlier detection of the same burst.
  std::size_t merged_detections = 0;
  std::size_t segment_length = 0;
  /// Set when the number of kept segments differs from `expected`.
  bool count_mismatch = false;
  Warnings warnings;
};

struct Segmentation {
  std::vector<ResponseSegment> segments;
  SegmentationReport report;
};

/// Cuts one segment per detected response, all of a common length. With an
/// alignment, detections rising within half a burst spacing of a burst onset
/// are merged into that burst's response and segments are indexed by burst;
/// otherwise they are numbered in order of appearance. Segments are returned before normalization.
Segmentation segment_responses(std::span<const double> signal, const ScheduleAlignment* alignment,
                               const VtConfig& cfg, const SegmentOptions& options = {},
                               std::string device_id = {}, std::string session_id = {});

/// Divides by the root mean square. Throws ZeroSegment for an all-zero input.
std::vector<double> rms_normalize(std::span<const double> samples);

void normalize_segments(std::vector<ResponseSegment>& segments);

std::string format_segments(const std::vector<ResponseSegment>& segments);
std::vector<ResponseSegment> parse_segments(std::string_view csv);

}  // namespace magprint
