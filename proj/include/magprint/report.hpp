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

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "magprint/eval.hpp"
#include "magprint/experiments.hpp"
#include "magprint/selection.hpp"

namespace magprint {

/// First header cell is free text; remaining header cells are predicted
/// labels, each row starts with its actual label. Blank cells read as 0
/// with a warning.
std::string format_confusion_csv(const ConfusionCounts& counts);
ConfusionCounts parse_confusion_csv(std::string_view csv, Warnings* warnings = nullptr);

/// `threshold,fpr,fnr`
std::string format_roc_csv(const RocCurve& curve);
RocCurve parse_roc_csv(std::string_view csv);

/// `group,device_a,device_b,eer`
std::string format_eer_csv(const std::vector<PairEer>& rows);
std::vector<PairEer> parse_eer_csv(std::string_view csv);

/// `group,mean_eer`
std::string format_group_means_csv(const std::map<std::string, double>& means);
std::map<std::string, double> parse_group_means_csv(std::string_view csv);

/// `snr_db,mean_eer,std_error,repetitions`
std::string format_noise_csv(const std::vector<NoisePoint>& points);

/// `waveform,inter_eer,intra_eer`
std::string format_waveform_csv(const std::vector<WaveformSummary>& rows);
std::vector<WaveformSummary> parse_waveform_csv(std::string_view csv);

/// `gamma,box_constraint,accuracy` over the whole surface.
std::string format_grid_csv(const GridSearchResult& result);
/// `fold,gamma,box_constraint,accuracy`
std::string format_fold_optima_csv(const GridSearchResult& result);

/// `step,subset,metric`
std::string format_selection_csv(const SelectionResult& result);

/// Line plot of FNR against FPR, one polyline per named curve.
std::string render_roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves, std::string_view title);

}  // namespace magprint
