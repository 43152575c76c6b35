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

#include "magprint/multiclass.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "magprint/parallel.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "learn";

}  // namespace

std::size_t OaoModel::machine_index(std::size_t i, std::size_t j) const {
  const std::size_t n = class_labels.size();
  if (i > j) std::swap(i, j);
  // Machines before row i: sum_{r < i} (n - 1 - r)
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::size_t OaoModel::dimension() const noexcept {
  return machines.empty() ? 0 : machines.front().dimension();
}

OaoModel train_oao(const Matrix& rows, const std::vector<std::string>& labels, const SvmHyperParams& hyper,
                   const SmoOptions& opts, Warnings* warnings) {
  if (rows.rows() != labels.size()) {
    throw Error(Errc::DimensionMismatch, std::string(kModule),
                std::to_string(rows.rows()) + " rows but " + std::to_string(labels.size()) + " labels");
  }
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw Error(Errc::SingleClassInput, std::string(kModule), "one-against-one needs at least 2 classes");
  }
  OaoModel model;
  model.class_labels.assign(distinct.begin(), distinct.end());
  const std::size_t n = model.class_labels.size();

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < labels.size(); ++r) by_class[labels[r]].push_back(r);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  model.machines.resize(pairs.size());
  std::vector<Warnings> machine_warnings(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t m) {
    const auto& pos = by_class.at(model.class_labels[pairs[m].first]);
    const auto& neg = by_class.at(model.class_labels[pairs[m].second]);
    std::vector<std::size_t> idx(pos);
    idx.insert(idx.end(), neg.begin(), neg.end());
    std::vector<int> y(pos.size(), 1);
    y.resize(idx.size(), -1);
    SvmModel svm = train_binary_svm(select_rows(rows, idx), y, hyper, opts, &machine_warnings[m]);
    svm.positive_label = model.class_labels[pairs[m].first];
    svm.negative_label = model.class_labels[pairs[m].second];
    model.machines[m] = std::move(svm);
  });
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    for (auto& w : machine_warnings[m]) {
      warn(warnings, model.machines[m].positive_label + " vs " + model.machines[m].negative_label + ": " + w);
    }
  }
  return model;
}

OaoPrediction predict_oao(const OaoModel& model, std::span<const double> x) {
  const std::size_t n = model.class_labels.size();
  OaoPrediction out;
  out.votes.assign(n, 0);
  out.decision_mass.assign(n, 0.0);
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++m) {
      const double f = decision_value(model.machines[m], x);
      const std::size_t winner = f >= 0.0 ? i : j;
      ++out.votes[winner];
      out.decision_mass[winner] += std::abs(f);
    }
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < n; ++c) {
    if (out.votes[c] > out.votes[best] ||
        (out.votes[c] == out.votes[best] && out.decision_mass[c] > out.decision_mass[best])) {
      best = c;
    }
  }
  out.label = model.class_labels[best];
  return out;
}

std::string knn_classify(const Matrix& train, const std::vector<std::string>& labels, std::span<const double> x,
                         std::size_t k) {
  if (train.empty()) throw Error(Errc::EmptyTrain, std::string(kModule), "no training rows");
  if (train.rows() != labels.size()) {
    throw Error(Errc::DimensionMismatch, std::string(kModule), "row and label counts differ");
  }
  if (x.size() != train.cols()) {
    throw Error(Errc::DimensionMismatch, std::string(kModule),
                "query has " + std::to_string(x.size()) + " features, training rows " + std::to_string(train.cols()));
  }
  if (k == 0 || k > train.rows()) {
    throw Error(Errc::InvalidSpec, std::string(kModule),
                "k = " + std::to_string(k) + " must lie in 1.." + std::to_string(train.rows()));
  }
  std::vector<std::pair<double, std::size_t>> dist(train.rows());
  for (std::size_t r = 0; r < train.rows(); ++r) {
    double d2 = 0.0;
    const auto row = train.row(r);
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double d = row[c] - x[c];
      d2 += d * d;
    }
    dist[r] = {d2, r};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  struct Tally {
    int votes = 0;
    double dist_sum = 0.0;
  };
  std::map<std::string, Tally> tally;
  for (std::size_t i = 0; i < k; ++i) {
    auto& t = tally[labels[dist[i].second]];
    ++t.votes;
    t.dist_sum += std::sqrt(dist[i].first);
  }
  const std::string* best = nullptr;
  const Tally* best_t = nullptr;
  for (const auto& [label, t] : tally) {
    if (best == nullptr || t.votes > best_t->votes ||
        (t.votes == best_t->votes && t.dist_sum / t.votes < best_t->dist_sum / best_t->votes)) {
      best = &label;
      best_t = &t;
    }
  }
  return *best;
}

}  // namespace magprint
