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

#include <span>
#include <string>
#include <vector>

#include "magprint/matrix.hpp"
#include "magprint/svm.hpp"

namespace magprint {

/// One-against-one ensemble over sorted class labels. Machine for the pair
/// (i, j), i < j, treats class i as positive; machines are stored in the
/// order (0,1), (0,2), ..., (N-2,N-1).
struct OaoModel {
  std::vector<std::string> class_labels;
  std::vector<SvmModel> machines;

  std::size_t machine_index(std::size_t i, std::size_t j) const;
  std::size_t dimension() const noexcept;
};

OaoModel train_oao(const Matrix& rows, const std::vector<std::string>& labels, const SvmHyperParams& hyper,
                   const SmoOptions& opts = {}, Warnings* warnings = nullptr);

struct OaoPrediction {
  std::string label;
  std::vector<int> votes;              // per class label
  std::vector<double> decision_mass;   // summed |f| of the machines voting for each class
};

/// A decision value of exactly 0 counts as a vote for the positive class.
/// Vote ties go to the larger decision mass, then to the earlier label.
OaoPrediction predict_oao(const OaoModel& model, std::span<const double> x);

/// Majority label among the k nearest training rows (Euclidean). Equal
/// distances keep row order; vote ties go to the smaller mean distance,
/// then to the earlier label.
std::string knn_classify(const Matrix& train, const std::vector<std::string>& labels,
                         std::span<const double> x, std::size_t k = 1);

}  // namespace magprint
