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
#include <string>
#include <vector>

#include "magprint/features.hpp"
#include "magprint/ingest.hpp"
#include "magprint/preprocess.hpp"
#include "magprint/simulator.hpp"
#include "magprint/stimulus.hpp"

namespace magprint {

/// splitmix64 of `base` combined with a stream index; used to derive
/// independent per-device, per-day and per-repetition seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

struct PipelineOptions {
  Channel channel = Channel::Magnitude;
  VtConfig vt;
  SegmentOptions segment;
  FeatureOptions features;
};

/// One session per device, device k seeded with mix_seed(seed, k).
std::vector<Trace> simulate_park(const std::vector<DeviceSignature>& park, const WaveformSpec& spec,
                                 const SessionOptions& session, std::uint64_t seed);

struct TraceSegmentation {
  std::vector<ResponseSegment> segments;  // not normalized
  std::vector<SegmentationReport> reports;
  std::size_t segment_length = 0;
};

/// Segments every trace against the stimulus schedule of `spec` (or blind
/// when null) using one common segment length: the configured one, else the
/// median of the per-trace median detection lengths.
TraceSegmentation segment_traces(const std::vector<Trace>& traces, const WaveformSpec* spec,
                                 const PipelineOptions& opts = {});

/// RMS-normalizes and extracts features; degenerate segments are dropped.
FeatureMatrix featurize(std::vector<ResponseSegment> segments, const FeatureOptions& opts = {},
                        std::vector<DroppedRow>* dropped = nullptr);

/// simulate_park, segment_traces and featurize in one call.
struct SimulatedDataset {
  std::vector<DeviceSignature> park;
  std::vector<Trace> traces;
  TraceSegmentation segmentation;
  FeatureMatrix features;
};

SimulatedDataset simulate_dataset(const ParkSpec& park_spec, const WaveformSpec& spec, const SessionOptions& session,
                                  std::uint64_t seed, const PipelineOptions& opts = {});

}  // namespace magprint
