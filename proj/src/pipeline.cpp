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

#include "magprint/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "magprint/parallel.hpp"

namespace magprint {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Trace> simulate_park(const std::vector<DeviceSignature>& park, const WaveformSpec& spec,
                                 const SessionOptions& session, std::uint64_t seed) {
  const PulseSchedule schedule = pulse_onsets(spec);
  std::vector<Trace> traces(park.size());
  parallel_for(park.size(), [&](std::size_t k) {
    traces[k] = simulate_session(park[k], schedule, spec, session, mix_seed(seed, k));
  });
  return traces;
}

TraceSegmentation segment_traces(const std::vector<Trace>& traces, const WaveformSpec* spec,
                                 const PipelineOptions& opts) {
  TraceSegmentation out;
  if (traces.empty()) return out;
  std::vector<std::vector<double>> signals(traces.size());
  std::vector<ScheduleAlignment> alignments(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].samples.empty()) {
      throw Error(Errc::EmptyTrace, "preprocess", "trace of " + traces[i].device_id + " has no samples");
    }
    signals[i] = extract_channel(traces[i], opts.channel);
    if (spec) {
      alignments[i] = {pulse_onsets(*spec), traces[i].samples.front().t_ms, traces[i].sample_rate_hz};
    }
  }
  auto run = [&](const SegmentOptions& seg) {
    std::vector<Segmentation> results(traces.size());
    parallel_for(traces.size(), [&](std::size_t i) {
      results[i] = segment_responses(signals[i], spec ? &alignments[i] : nullptr, opts.vt, seg, traces[i].device_id,
                                     traces[i].session_id);
    });
    return results;
  };

  SegmentOptions seg = opts.segment;
  if (!seg.segment_length) {
    std::vector<std::size_t> lengths;
    for (const auto& r : run(seg)) lengths.push_back(r.report.segment_length);
    std::sort(lengths.begin(), lengths.end());
    const std::size_t m = lengths.size();
    seg.segment_length = m % 2 ? lengths[m / 2]
                               : static_cast<std::size_t>(std::lround(0.5 * static_cast<double>(lengths[m / 2 - 1] + lengths[m / 2])));
  }
  out.segment_length = *seg.segment_length;
  for (auto& r : run(seg)) {
    out.segments.insert(out.segments.end(), std::make_move_iterator(r.segments.begin()),
                        std::make_move_iterator(r.segments.end()));
    out.reports.push_back(std::move(r.report));
  }
  return out;
}

FeatureMatrix featurize(std::vector<ResponseSegment> segments, const FeatureOptions& opts,
                        std::vector<DroppedRow>* dropped) {
  std::vector<ResponseSegment> kept;
  kept.reserve(segments.size());
  for (auto& s : segments) {
    try {
      s.samples = rms_normalize(s.samples);
      kept.push_back(std::move(s));
    } catch (const Error& e) {
      if (e.code() != Errc::ZeroSegment) throw;
      if (dropped) dropped->push_back({s.device_id, s.session_id, s.index, e.message()});
    }
  }
  // Extraction is row-parallel; build_feature_matrix keeps input order.
  std::vector<std::vector<ResponseSegment>> chunks;
  const std::size_t workers = std::max<std::size_t>(1, worker_count());
  const std::size_t per = (kept.size() + workers - 1) / workers;
  for (std::size_t i = 0; i < kept.size(); i += per) {
    chunks.emplace_back(std::make_move_iterator(kept.begin() + static_cast<std::ptrdiff_t>(i)),
                        std::make_move_iterator(kept.begin() + static_cast<std::ptrdiff_t>(std::min(i + per, kept.size()))));
  }
  std::vector<FeatureMatrix> parts(chunks.size());
  std::vector<std::vector<DroppedRow>> part_dropped(chunks.size());
  parallel_for(chunks.size(), [&](std::size_t c) { parts[c] = build_feature_matrix(chunks[c], opts, &part_dropped[c]); });
  FeatureMatrix out;
  std::size_t length = 0;
  for (std::size_t c = 0; c < parts.size(); ++c) {
    if (!chunks[c].empty()) {
      if (length == 0) length = chunks[c].front().samples.size();
      if (chunks[c].front().samples.size() != length) {
        throw Error(Errc::DimensionMismatch, "features", "segments must share one length");
      }
    }
    out.rows.insert(out.rows.end(), parts[c].rows.begin(), parts[c].rows.end());
    if (dropped) dropped->insert(dropped->end(), part_dropped[c].begin(), part_dropped[c].end());
  }
  return out;
}

SimulatedDataset simulate_dataset(const ParkSpec& park_spec, const WaveformSpec& spec, const SessionOptions& session,
                                  std::uint64_t seed, const PipelineOptions& opts) {
  SimulatedDataset out;
  out.park = make_park(park_spec);
  out.traces = simulate_park(out.park, spec, session, seed);
  out.segmentation = segment_traces(out.traces, &spec, opts);
  out.features = featurize(out.segmentation.segments, opts.features);
  return out;
}

}  // namespace magprint
