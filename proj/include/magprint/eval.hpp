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
#include <span>
#include <string>
#include <vector>

#include "magprint/features.hpp"
#include "magprint/multiclass.hpp"
#include "magprint/svm.hpp"

namespace magprint {

/// Stratified k-fold partition. `blocks[f]` lists the held-out rows of fold
/// f in ascending order; per class, block sizes differ by at most one.
struct FoldPlan {
  int k = 10;
  std::size_t row_count = 0;
  std::vector<std::vector<std::size_t>> blocks;

  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

/// Throws TooFewSamples when k < 2 or some class has fewer than k rows.
FoldPlan kfold_split(const std::vector<std::string>& labels, int k, std::uint64_t seed);
FoldPlan kfold_split(const FeatureMatrix& matrix, int k, std::uint64_t seed);

/// Rows are actual classes, columns predicted classes.
struct ConfusionCounts {
  std::vector<std::string> class_labels;
  std::vector<std::vector<long long>> matrix;

  static ConfusionCounts zeros(std::vector<std::string> labels);
  std::size_t index_of(const std::string& label) const;
  void add(const std::string& actual, const std::string& predicted, long long count = 1);
  void merge(const ConfusionCounts& other);
  long long total() const;
  long long diagonal_sum() const;
  long long true_positives(std::size_t c) const;
  long long false_positives(std::size_t c) const;
  long long false_negatives(std::size_t c) const;
  long long true_negatives(std::size_t c) const;
};

/// Diagonal sum over total. Throws EmptyCounts on a zero total.
double accuracy(const ConfusionCounts& counts);

/// Per-fold standardized copies of all 18 feature columns, so that many
/// feature masks and hyperparameters can be scored against one plan.
class CvWorkspace {
 public:
  CvWorkspace(const FeatureMatrix& matrix, const FoldPlan& plan);

  std::size_t fold_count() const noexcept { return folds_.size(); }
  const std::vector<std::string>& class_labels() const noexcept { return classes_; }

  ConfusionCounts svm_counts(const FeatureMask& mask, const SvmHyperParams& hyper, const SmoOptions& smo = {},
                             Warnings* warnings = nullptr) const;
  std::vector<ConfusionCounts> svm_fold_counts(const FeatureMask& mask, const SvmHyperParams& hyper,
                                               const SmoOptions& smo = {}, Warnings* warnings = nullptr) const;
  ConfusionCounts knn_counts(const FeatureMask& mask, std::size_t k = 1) const;

 private:
  struct Fold {
    Matrix train;
    Matrix test;
    std::vector<std::string> train_labels;
    std::vector<std::string> test_labels;
  };
  std::vector<Fold> folds_;
  std::vector<std::string> classes_;
};

/// Per fold: standardize on the training rows, train OAO, classify the held-out
/// block; counts are summed over folds.
ConfusionCounts cross_validate(const FeatureMatrix& matrix, const FoldPlan& plan, const SvmHyperParams& hyper,
                               const FeatureMask& mask, const SmoOptions& smo = {}, Warnings* warnings = nullptr);
ConfusionCounts cross_validate_knn(const FeatureMatrix& matrix, const FoldPlan& plan, const FeatureMask& mask,
                                   std::size_t k = 1);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// Points in increasing threshold order, from -inf (everything accepted) to
/// +inf (everything rejected). A score s is accepted at threshold t when s >= t.
struct RocCurve {
  std::vector<RocPoint> points;
  std::string positive_label = "genuine";
  std::string negative_label = "impostor";
};

RocCurve roc_curve(std::span<const double> genuine, std::span<const double> impostor);

/// Equal error rate: linear interpolation between the first point with
/// FPR <= FNR and its predecessor.
double eer(const RocCurve& curve);

struct VerifyOptions {
  int folds = 10;
  std::uint64_t seed = 42;
  SvmHyperParams hyper;
  SmoOptions smo;
  FeatureMask mask = FeatureMask::all();
};

struct Verification {
  std::string device_a;
  std::string device_b;
  std::vector<double> genuine;   // held-out decision values of device_a rows
  std::vector<double> impostor;  // held-out decision values of device_b rows
  RocCurve curve;
  double eer = 0.0;
  bool converged = true;
};

/// Binary SVM, device_a positive, trained per fold on that pair's rows only;
/// held-out decision values are pooled across folds.
Verification verify_pair(const FeatureMatrix& matrix, const std::string& device_a, const std::string& device_b,
                         const VerifyOptions& opts = {});

/// Trains on `train` rows of the pair and scores all `test` rows of the pair.
Verification verify_pair_across(const FeatureMatrix& train, const FeatureMatrix& test, const std::string& device_a,
                                const std::string& device_b, const VerifyOptions& opts = {});

/// verify_pair for many pairs, run in parallel, results in input order.
std::vector<Verification> verify_pairs(const FeatureMatrix& matrix,
                                       const std::vector<std::pair<std::string, std::string>>& pairs,
                                       const VerifyOptions& opts = {});

}  // namespace magprint
