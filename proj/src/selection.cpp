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

#include "magprint/selection.hpp"

#include <cmath>

#include "magprint/parallel.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "learn";

void combinations(const std::vector<int>& pool, std::size_t k, std::vector<FeatureMask>& out) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  const std::size_t n = pool.size();
  for (;;) {
    std::vector<int> subset(k);
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
    out.emplace_back(std::move(subset));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Lower C wins, then lower gamma.
bool better_cell(double acc, double c, double g, double best_acc, double best_c, double best_g) {
  if (acc != best_acc) return acc > best_acc;
  if (c != best_c) return c < best_c;
  return g < best_g;
}

}  // namespace

unsigned long long binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  unsigned long long r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

SelectionResult brute_force_select(const CvWorkspace& cv, const SvmHyperParams& hyper, std::size_t subset_size,
                                   const FeatureMask& pool, const SmoOptions& smo) {
  if (subset_size == 0 || subset_size > pool.size()) {
    throw Error(Errc::InvalidSpec, std::string(kModule),
                "subset size " + std::to_string(subset_size) + " must lie in 1.." + std::to_string(pool.size()));
  }
  std::vector<FeatureMask> subsets;
  subsets.reserve(binomial(static_cast<unsigned>(pool.size()), static_cast<unsigned>(subset_size)));
  combinations(pool.indices(), subset_size, subsets);

  std::vector<double> metric(subsets.size());
  parallel_for(subsets.size(), [&](std::size_t i) { metric[i] = accuracy(cv.svm_counts(subsets[i], hyper, smo)); });

  SelectionResult out;
  out.search_log.reserve(subsets.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    out.search_log.push_back({subsets[i], metric[i]});
    if (metric[i] > metric[best]) best = i;
  }
  out.chosen = subsets[best];
  out.metric_value = metric[best];
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (metric[i] == out.metric_value) out.tied.push_back(subsets[i]);
  }
  return out;
}

SelectionResult sfs_select(const CvWorkspace& cv, const SvmHyperParams& hyper, const FeatureMask& start,
                           const FeatureMask& pool, const SmoOptions& smo) {
  SelectionResult out;
  FeatureMask current = start;
  double current_metric = current.empty() ? 0.0 : accuracy(cv.svm_counts(current, hyper, smo));
  out.search_log.push_back({current, current_metric});
  for (;;) {
    std::vector<int> candidates;
    for (int f : pool.indices()) {
      if (!current.contains(f)) candidates.push_back(f);
    }
    if (candidates.empty()) break;
    std::vector<double> metric(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t i) {
      metric[i] = accuracy(cv.svm_counts(current.with(candidates[i]), hyper, smo));
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (metric[i] > metric[best]) best = i;
    }
    if (!(metric[best] > current_metric)) break;
    current = current.with(candidates[best]);
    current_metric = metric[best];
    out.search_log.push_back({current, current_metric});
  }
  out.chosen = current;
  out.metric_value = current_metric;
  out.tied.push_back(current);
  return out;
}

std::vector<double> power_grid(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

std::vector<double> default_gamma_grid() { return power_grid(-8, 8); }
std::vector<double> default_c_grid() { return power_grid(-8, 28); }

GridSearchResult grid_search(const CvWorkspace& cv, const FeatureMask& mask, const std::vector<double>& gamma_grid,
                             const std::vector<double>& c_grid, const SmoOptions& smo) {
  if (gamma_grid.empty() || c_grid.empty()) {
    throw Error(Errc::InvalidSpec, std::string(kModule), "gamma and C grids must be non-empty");
  }
  GridSearchResult out;
  out.gamma_grid = gamma_grid;
  out.c_grid = c_grid;
  out.surface.resize(gamma_grid.size() * c_grid.size());
  parallel_for(out.surface.size(), [&](std::size_t idx) {
    GridCell& cell = out.surface[idx];
    cell.gamma = gamma_grid[idx / c_grid.size()];
    cell.box_constraint = c_grid[idx % c_grid.size()];
    const SvmHyperParams hyper{cell.gamma, cell.box_constraint};
    ConfusionCounts total = ConfusionCounts::zeros(cv.class_labels());
    for (const auto& fc : cv.svm_fold_counts(mask, hyper, smo)) {
      cell.fold_accuracy.push_back(accuracy(fc));
      total.merge(fc);
    }
    cell.accuracy = accuracy(total);
  });

  const GridCell* best = &out.surface.front();
  for (const auto& cell : out.surface) {
    if (better_cell(cell.accuracy, cell.box_constraint, cell.gamma, best->accuracy, best->box_constraint,
                    best->gamma)) {
      best = &cell;
    }
  }
  out.best = {best->gamma, best->box_constraint};
  out.best_accuracy = best->accuracy;

  for (std::size_t f = 0; f < cv.fold_count(); ++f) {
    const GridCell* fb = &out.surface.front();
    for (const auto& cell : out.surface) {
      if (better_cell(cell.fold_accuracy[f], cell.box_constraint, cell.gamma, fb->fold_accuracy[f],
                      fb->box_constraint, fb->gamma)) {
        fb = &cell;
      }
    }
    out.fold_optima.push_back({f, {fb->gamma, fb->box_constraint}, fb->fold_accuracy[f]});
  }
  return out;
}

}  // namespace magprint
