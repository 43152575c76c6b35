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

#include "magprint/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "magprint/parallel.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "eval";

std::vector<std::size_t> rows_of(const FeatureMatrix& m, const std::string& a, const std::string& b) {
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    if (m.rows[r].device_id == a || m.rows[r].device_id == b) idx.push_back(r);
  }
  return idx;
}

void require_device(const FeatureMatrix& m, const std::string& device) {
  for (const auto& r : m.rows) {
    if (r.device_id == device) return;
  }
  throw Error(Errc::UnknownLabel, std::string(kModule), "device '" + device + "' has no rows");
}

std::vector<int> binary_labels(const FeatureMatrix& m, const std::string& positive) {
  std::vector<int> y(m.rows.size());
  for (std::size_t r = 0; r < y.size(); ++r) y[r] = m.rows[r].device_id == positive ? 1 : -1;
  return y;
}

RocCurve finish_curve(const Verification& v) {
  RocCurve curve = roc_curve(v.genuine, v.impostor);
  curve.positive_label = v.device_a;
  curve.negative_label = v.device_b;
  return curve;
}

}  // namespace

// --- folds ---------------------------------------------------------------

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<bool> held(row_count, false);
  for (auto r : blocks.at(fold)) held[r] = true;
  std::vector<std::size_t> out;
  out.reserve(row_count - blocks[fold].size());
  for (std::size_t r = 0; r < row_count; ++r) {
    if (!held[r]) out.push_back(r);
  }
  return out;
}

FoldPlan kfold_split(const std::vector<std::string>& labels, int k, std::uint64_t seed) {
  if (k < 2) {
    throw Error(Errc::TooFewSamples, std::string(kModule),
                "k = " + std::to_string(k) + " leaves no held-out block; need k >= 2");
  }
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < labels.size(); ++r) by_class[labels[r]].push_back(r);
  for (const auto& [label, rows] : by_class) {
    if (rows.size() < static_cast<std::size_t>(k)) {
      throw Error(Errc::TooFewSamples, std::string(kModule),
                  "class '" + label + "' has " + std::to_string(rows.size()) + " rows, fewer than k = " +
                      std::to_string(k));
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.row_count = labels.size();
  plan.blocks.assign(static_cast<std::size_t>(k), {});
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  for (auto& [label, rows] : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t p = 0; p < rows.size(); ++p) plan.blocks[(offset + p) % k].push_back(rows[p]);
    offset = (offset + rows.size()) % k;
  }
  for (auto& b : plan.blocks) std::sort(b.begin(), b.end());
  return plan;
}

FoldPlan kfold_split(const FeatureMatrix& matrix, int k, std::uint64_t seed) {
  return kfold_split(matrix.labels(), k, seed);
}

// --- confusion counts ----------------------------------------------------

ConfusionCounts ConfusionCounts::zeros(std::vector<std::string> labels) {
  ConfusionCounts c;
  c.class_labels = std::move(labels);
  c.matrix.assign(c.class_labels.size(), std::vector<long long>(c.class_labels.size(), 0));
  return c;
}

std::size_t ConfusionCounts::index_of(const std::string& label) const {
  auto it = std::find(class_labels.begin(), class_labels.end(), label);
  if (it == class_labels.end()) {
    throw Error(Errc::UnknownLabel, std::string(kModule), "label '" + label + "' not in confusion matrix");
  }
  return static_cast<std::size_t>(it - class_labels.begin());
}

void ConfusionCounts::add(const std::string& actual, const std::string& predicted, long long count) {
  matrix[index_of(actual)][index_of(predicted)] += count;
}

void ConfusionCounts::merge(const ConfusionCounts& other) {
  for (std::size_t i = 0; i < other.class_labels.size(); ++i) {
    for (std::size_t j = 0; j < other.class_labels.size(); ++j) {
      if (other.matrix[i][j] != 0) add(other.class_labels[i], other.class_labels[j], other.matrix[i][j]);
    }
  }
}

long long ConfusionCounts::total() const {
  long long t = 0;
  for (const auto& row : matrix) {
    for (auto v : row) t += v;
  }
  return t;
}

long long ConfusionCounts::diagonal_sum() const {
  long long t = 0;
  for (std::size_t i = 0; i < matrix.size(); ++i) t += matrix[i][i];
  return t;
}

long long ConfusionCounts::true_positives(std::size_t c) const { return matrix.at(c).at(c); }

long long ConfusionCounts::false_positives(std::size_t c) const {
  long long t = 0;
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    if (r != c) t += matrix[r][c];
  }
  return t;
}

long long ConfusionCounts::false_negatives(std::size_t c) const {
  long long t = 0;
  for (std::size_t p = 0; p < matrix.size(); ++p) {
    if (p != c) t += matrix[c][p];
  }
  return t;
}

long long ConfusionCounts::true_negatives(std::size_t c) const {
  return total() - true_positives(c) - false_positives(c) - false_negatives(c);
}

double accuracy(const ConfusionCounts& counts) {
  const long long total = counts.total();
  if (total <= 0) throw Error(Errc::EmptyCounts, std::string(kModule), "confusion matrix has no entries");
  return static_cast<double>(counts.diagonal_sum()) / static_cast<double>(total);
}

// --- cross-validation ----------------------------------------------------

CvWorkspace::CvWorkspace(const FeatureMatrix& matrix, const FoldPlan& plan) : classes_(matrix.class_labels()) {
  if (plan.row_count != matrix.size()) {
    throw Error(Errc::DimensionMismatch, std::string(kModule), "fold plan does not match matrix row count");
  }
  const Matrix all = matrix.project(FeatureMask::all());
  const auto labels = matrix.labels();
  folds_.resize(plan.blocks.size());
  for (std::size_t f = 0; f < plan.blocks.size(); ++f) {
    const auto train_idx = plan.train_rows(f);
    const auto& test_idx = plan.blocks[f];
    auto z = standardize(select_rows(all, train_idx), select_rows(all, test_idx));
    folds_[f].train = std::move(z.train);
    folds_[f].test = std::move(z.apply_to);
    for (auto r : train_idx) folds_[f].train_labels.push_back(labels[r]);
    for (auto r : test_idx) folds_[f].test_labels.push_back(labels[r]);
  }
}

std::vector<ConfusionCounts> CvWorkspace::svm_fold_counts(const FeatureMask& mask, const SvmHyperParams& hyper,
                                                        const SmoOptions& smo, Warnings* warnings) const {
  const auto cols = mask.columns();
  std::vector<ConfusionCounts> per_fold(folds_.size(), ConfusionCounts::zeros(classes_));
  std::vector<Warnings> fold_warnings(folds_.size());
  parallel_for(folds_.size(), [&](std::size_t f) {
    const auto& fold = folds_[f];
    const OaoModel model = train_oao(select_cols(fold.train, cols), fold.train_labels, hyper, smo, &fold_warnings[f]);
    const Matrix test = select_cols(fold.test, cols);
    for (std::size_t r = 0; r < test.rows(); ++r) {
      per_fold[f].add(fold.test_labels[r], predict_oao(model, test.row(r)).label);
    }
  });
  for (std::size_t f = 0; f < folds_.size(); ++f) {
    for (auto& w : fold_warnings[f]) warn(warnings, "fold " + std::to_string(f) + ": " + w);
  }
  return per_fold;
}

ConfusionCounts CvWorkspace::svm_counts(const FeatureMask& mask, const SvmHyperParams& hyper, const SmoOptions& smo,
                                        Warnings* warnings) const {
  ConfusionCounts total = ConfusionCounts::zeros(classes_);
  for (const auto& c : svm_fold_counts(mask, hyper, smo, warnings)) total.merge(c);
  return total;
}

ConfusionCounts CvWorkspace::knn_counts(const FeatureMask& mask, std::size_t k) const {
  const auto cols = mask.columns();
  std::vector<ConfusionCounts> per_fold(folds_.size(), ConfusionCounts::zeros(classes_));
  parallel_for(folds_.size(), [&](std::size_t f) {
    const auto& fold = folds_[f];
    const Matrix train = select_cols(fold.train, cols);
    const Matrix test = select_cols(fold.test, cols);
    for (std::size_t r = 0; r < test.rows(); ++r) {
      per_fold[f].add(fold.test_labels[r], knn_classify(train, fold.train_labels, test.row(r), k));
    }
  });
  ConfusionCounts total = ConfusionCounts::zeros(classes_);
  for (const auto& c : per_fold) total.merge(c);
  return total;
}

ConfusionCounts cross_validate(const FeatureMatrix& matrix, const FoldPlan& plan, const SvmHyperParams& hyper,
                               const FeatureMask& mask, const SmoOptions& smo, Warnings* warnings) {
  return CvWorkspace(matrix, plan).svm_counts(mask, hyper, smo, warnings);
}

ConfusionCounts cross_validate_knn(const FeatureMatrix& matrix, const FoldPlan& plan, const FeatureMask& mask,
                                   std::size_t k) {
  return CvWorkspace(matrix, plan).knn_counts(mask, k);
}

// --- ROC / EER -----------------------------------------------------------

RocCurve roc_curve(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty()) {
    throw Error(Errc::EmptyScores, std::string(kModule), "genuine and impostor score lists must be non-empty");
  }
  std::vector<double> g(genuine.begin(), genuine.end());
  std::vector<double> im(impostor.begin(), impostor.end());
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  std::vector<double> thresholds;
  thresholds.reserve(g.size() + im.size() + 2);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  thresholds.insert(thresholds.end(), g.begin(), g.end());
  thresholds.insert(thresholds.end(), im.begin(), im.end());
  std::sort(thresholds.begin() + 1, thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  const double ng = static_cast<double>(g.size());
  const double ni = static_cast<double>(im.size());
  RocCurve curve;
  curve.points.reserve(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    // Sentinels: -inf accepts everything, +inf rejects everything.
    const bool last = i + 1 == thresholds.size();
    const auto imp_below = last ? im.size() : static_cast<std::size_t>(std::lower_bound(im.begin(), im.end(), t) - im.begin());
    const auto gen_below = last ? g.size() : static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), t) - g.begin());
    curve.points.push_back({t, static_cast<double>(im.size() - imp_below) / ni, static_cast<double>(gen_below) / ng});
  }
  return curve;
}

double eer(const RocCurve& curve) {
  const auto& p = curve.points;
  if (p.empty()) throw Error(Errc::EmptyScores, std::string(kModule), "ROC curve has no points");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i].fpr - p[i].fnr;
    if (d > 0.0) continue;
    if (d == 0.0 || i == 0) return p[i].fpr;
    const double d0 = p[i - 1].fpr - p[i - 1].fnr;
    const double t = d0 / (d0 - d);
    return p[i - 1].fpr + t * (p[i].fpr - p[i - 1].fpr);
  }
  return p.back().fpr;
}

// --- verification --------------------------------------------------------

Verification verify_pair(const FeatureMatrix& matrix, const std::string& device_a, const std::string& device_b,
                         const VerifyOptions& opts) {
  require_device(matrix, device_a);
  require_device(matrix, device_b);
  if (device_a == device_b) {
    throw Error(Errc::InvalidSpec, std::string(kModule), "verification needs two distinct devices");
  }
  const FeatureMatrix pair = matrix.subset(rows_of(matrix, device_a, device_b));
  const FoldPlan plan = kfold_split(pair, opts.folds, opts.seed);
  const Matrix x = pair.project(opts.mask);
  const auto y = binary_labels(pair, device_a);

  struct FoldScores {
    std::vector<double> genuine, impostor;
    bool converged = true;
  };
  std::vector<FoldScores> scores(plan.blocks.size());
  parallel_for(plan.blocks.size(), [&](std::size_t f) {
    const auto train_idx = plan.train_rows(f);
    const auto& test_idx = plan.blocks[f];
    auto z = standardize(select_rows(x, train_idx), select_rows(x, test_idx));
    std::vector<int> ty;
    ty.reserve(train_idx.size());
    for (auto r : train_idx) ty.push_back(y[r]);
    const SvmModel model = train_binary_svm(z.train, ty, opts.hyper, opts.smo);
    scores[f].converged = model.converged;
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      const double v = decision_value(model, z.apply_to.row(i));
      (y[test_idx[i]] > 0 ? scores[f].genuine : scores[f].impostor).push_back(v);
    }
  });
  Verification out;
  out.device_a = device_a;
  out.device_b = device_b;
  for (const auto& s : scores) {
    out.genuine.insert(out.genuine.end(), s.genuine.begin(), s.genuine.end());
    out.impostor.insert(out.impostor.end(), s.impostor.begin(), s.impostor.end());
    out.converged = out.converged && s.converged;
  }
  out.curve = finish_curve(out);
  out.eer = eer(out.curve);
  return out;
}

Verification verify_pair_across(const FeatureMatrix& train, const FeatureMatrix& test, const std::string& device_a,
                                const std::string& device_b, const VerifyOptions& opts) {
  for (const auto* m : {&train, &test}) {
    require_device(*m, device_a);
    require_device(*m, device_b);
  }
  const FeatureMatrix tr = train.subset(rows_of(train, device_a, device_b));
  const FeatureMatrix te = test.subset(rows_of(test, device_a, device_b));
  auto z = standardize(tr.project(opts.mask), te.project(opts.mask));
  const SvmModel model = train_binary_svm(z.train, binary_labels(tr, device_a), opts.hyper, opts.smo);
  Verification out;
  out.device_a = device_a;
  out.device_b = device_b;
  out.converged = model.converged;
  for (std::size_t r = 0; r < te.rows.size(); ++r) {
    const double v = decision_value(model, z.apply_to.row(r));
    (te.rows[r].device_id == device_a ? out.genuine : out.impostor).push_back(v);
  }
  out.curve = finish_curve(out);
  out.eer = eer(out.curve);
  return out;
}

std::vector<Verification> verify_pairs(const FeatureMatrix& matrix,
                                       const std::vector<std::pair<std::string, std::string>>& pairs,
                                       const VerifyOptions& opts) {
  std::vector<Verification> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) { out[i] = verify_pair(matrix, pairs[i].first, pairs[i].second, opts); });
  return out;
}

}  // namespace magprint
