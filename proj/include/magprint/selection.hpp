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

#include <vector>

#include "magprint/eval.hpp"

namespace magprint {

struct SelectionStep {
  FeatureMask subset;
  double metric = 0.0;
};

/// `search_log` holds every evaluated subset for brute force, and the start
/// subset followed by each accepted addition for SFS.
struct SelectionResult {
  FeatureMask chosen;
  double metric_value = 0.0;
  std::vector<SelectionStep> search_log;
  std::vector<FeatureMask> tied;  // all subsets reaching metric_value (brute force)
};

/// C(n, k) for small arguments.
unsigned long long binomial(unsigned n, unsigned k);

/// Scores every `subset_size` subset of `pool` by pooled cross-validated
/// accuracy. The first subset in lexicographic order reaching the maximum is
/// chosen.
SelectionResult brute_force_select(const CvWorkspace& cv, const SvmHyperParams& hyper, std::size_t subset_size = 6,
                                   const FeatureMask& pool = FeatureMask::all(), const SmoOptions& smo = {});

/// Greedy forward selection from `start`: each round adds the feature with
/// the largest accuracy (lowest index on ties) and stops when no addition
/// strictly improves. An empty start scores 0.
SelectionResult sfs_select(const CvWorkspace& cv, const SvmHyperParams& hyper, const FeatureMask& start,
                           const FeatureMask& pool = FeatureMask::all(), const SmoOptions& smo = {});

struct GridCell {
  double gamma = 0.0;
  double box_constraint = 0.0;
  double accuracy = 0.0;
  std::vector<double> fold_accuracy;
};

struct FoldOptimum {
  std::size_t fold = 0;
  SvmHyperParams hyper;
  double accuracy = 0.0;
};

struct GridSearchResult {
  SvmHyperParams best;
  double best_accuracy = 0.0;
  std::vector<double> gamma_grid;
  std::vector<double> c_grid;
  std::vector<GridCell> surface;  // gamma-major: index = g * c_grid.size() + c
  std::vector<FoldOptimum> fold_optima;
};

/// 2^lo, 2^(lo+1), ..., 2^hi
std::vector<double> power_grid(int lo, int hi);
std::vector<double> default_gamma_grid();  // 2^-8 .. 2^8
std::vector<double> default_c_grid();      // 2^-8 .. 2^28

/// Ties on accuracy go to the smallest C, then the smallest gamma; the same
/// rule picks each fold's optimum.
GridSearchResult grid_search(const CvWorkspace& cv, const FeatureMask& mask, const std::vector<double>& gamma_grid,
                             const std::vector<double>& c_grid, const SmoOptions& smo = {});

}  // namespace magprint
