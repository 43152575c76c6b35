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
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "magprint/eval.hpp"
#include "magprint/preprocess.hpp"

namespace magprint {

using DevicePair = std::pair<std::string, std::string>;

/// One EER row of an experiment table. `group` names the day, day pair,
/// waveform or regime the row belongs to.
struct PairEer {
  std::string group;
  std::string device_a;
  std::string device_b;
  double eer = 0.0;
};

/// All unordered pairs of sorted device labels, restricted to same-group
/// (intra) or cross-group (inter) pairs under `device_group`.
std::vector<DevicePair> device_pairs(const std::vector<std::string>& devices,
                                     const std::map<std::string, std::string>& device_group, bool same_group);

/// Mean EER per group of device_a.
std::map<std::string, double> mean_by_group(const std::vector<PairEer>& rows,
                                            const std::map<std::string, std::string>& device_group);

struct StabilityReport {
  std::vector<std::string> days;
  std::vector<PairEer> within_day;   // group = day
  std::vector<PairEer> cross_day;    // group = "train_day>test_day"
  std::vector<PairEer> same_device;  // group = "day_i|day_j", device_a == device_b
};

/// (a) per-day EERs of the given device pairs, (b) EERs for the same pairs
/// trained on one day and scored on another, (c) each device's rows on day i
/// verified against its rows on day j.
StabilityReport stability_report(const std::map<std::string, FeatureMatrix>& by_day,
                                 const std::vector<std::string>& days, const std::vector<DevicePair>& pairs,
                                 const VerifyOptions& opts = {});

struct NoiseSweepOptions {
  std::vector<double> snr_db{30.0, 20.0, 10.0, 0.0};
  int repetitions = 50;
  std::uint64_t seed = 42;
  VerifyOptions verify;
  FeatureOptions features;
};

struct NoisePoint {
  double snr_db = std::numeric_limits<double>::infinity();
  double mean_eer = 0.0;
  double std_error = 0.0;
  std::vector<double> eers;
};

/// For each SNR, adds white noise to the raw (not yet normalized) segments
/// of the two devices, recomputes features and verifies the pair; repeated
/// with independent noise seeds. An infinite SNR is evaluated once.
std::vector<NoisePoint> noise_sweep(const std::vector<ResponseSegment>& raw_segments, const std::string& device_a,
                                    const std::string& device_b, const NoiseSweepOptions& opts = {});

struct WaveformSummary {
  std::string waveform_id;
  double inter_eer = 0.0;  // mean over cross-model pairs
  double intra_eer = 0.0;  // mean over same-model pairs
  std::vector<PairEer> pairs;  // group = "inter" or "intra"
};

WaveformSummary summarize_waveform(const std::string& waveform_id, const FeatureMatrix& matrix,
                                   const std::map<std::string, std::string>& device_model,
                                   const VerifyOptions& opts = {});

std::vector<WaveformSummary> waveform_comparison(const std::vector<std::pair<std::string, FeatureMatrix>>& per_waveform,
                                                 const std::map<std::string, std::string>& device_model,
                                                 const VerifyOptions& opts = {});

}  // namespace magprint
