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

#include <array>
#include <complex>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "magprint/matrix.hpp"
#include "magprint/preprocess.hpp"

namespace magprint {

/// Features 1-6 describe the time-domain samples, 7-12 the DFT phase and
/// 13-18 the DFT amplitude; each block is the same six statistics.
inline constexpr int kFeatureCount = 18;
inline constexpr double kDefaultLogFloor = 1e-12;

struct FeatureOptions {
  /// Standardized moments m3/m2^1.5 and m4/m2^2 in place of the default
  /// sum(s^3 - mu^3)/sigma^3 and sum(s^4 - mu^4)/sigma^4.
  bool classical_moments = false;
  /// Floor applied to s^2 before taking its logarithm.
  double log_floor = kDefaultLogFloor;
};

/// Shannon entropy, log energy, standard deviation, variance, skewness and
/// kurtosis of one sequence. When the spread is zero the last two are NaN
/// and `degenerate` is set.
struct StatBlock {
  std::array<double, 6> values{};
  bool degenerate = false;
};

StatBlock statistical_block(std::span<const double> s, const FeatureOptions& opts = {});

/// Features 1-6. Throws SegmentTooShort (N < 2) or DegenerateSegment.
std::array<double, 6> time_features(std::span<const double> s, const FeatureOptions& opts = {});

/// Unnormalized forward DFT, X[k] = sum_n s[n] exp(-2 pi i k n / N), over
/// all N bins.
std::vector<std::complex<double>> dft(std::span<const double> s);

struct PolarSpectrum {
  std::vector<double> phase;      // principal value in (-pi, pi]
  std::vector<double> amplitude;  // |X[k]|
};

/// Phase and amplitude of the DFT. Bins whose magnitude is negligible
/// relative to sum|s| are treated as exact zeros with phase 0; the DC and
/// Nyquist bins of the real input are taken as exactly real.
PolarSpectrum polar_spectrum(std::span<const double> s);

/// Features 7-18.
std::array<double, 12> spectral_features(std::span<const double> s, const FeatureOptions& opts = {});

/// All 18 features in index order.
std::array<double, kFeatureCount> extract_features(std::span<const double> s,
                                                   const FeatureOptions& opts = {});

/// Sorted set of 1-based feature indices.
class FeatureMask {
 public:
  FeatureMask() = default;
  FeatureMask(std::initializer_list<int> indices);
  explicit FeatureMask(std::vector<int> indices);

  static FeatureMask all();
  /// Accepts separators ' ', ',' and optional brackets: "[1 2 3 6]".
  static FeatureMask parse(std::string_view text);

  const std::vector<int>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(int index) const;
  bool contains(const FeatureMask& other) const;
  FeatureMask with(int index) const;
  /// 0-based column positions.
  std::vector<std::size_t> columns() const;
  std::string to_string() const;

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;
  friend auto operator<=>(const FeatureMask&, const FeatureMask&) = default;

 private:
  std::vector<int> indices_;
};

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  std::string device_id;
  std::string session_id;
  int segment_index = 0;
};

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  FeatureMask mask = FeatureMask::all();

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  /// Sorted distinct device labels.
  std::vector<std::string> class_labels() const;
  std::map<std::string, std::size_t> row_counts() const;
  std::vector<std::string> labels() const;
  /// Rows x mask.size() matrix of the masked features, in mask order.
  Matrix project(const FeatureMask& mask) const;
  Matrix project() const { return project(mask); }
  FeatureMatrix subset(std::span<const std::size_t> rows) const;
};

struct DroppedRow {
  std::string device_id;
  std::string session_id;
  int segment_index = 0;
  std::string reason;
};

/// One row per segment in input order. Degenerate segments are dropped and
/// listed in `dropped`.
FeatureMatrix build_feature_matrix(const std::vector<ResponseSegment>& segments,
                                   const FeatureOptions& opts = {},
                                   std::vector<DroppedRow>* dropped = nullptr);

/// Per-column z-score statistics. Constant columns keep std 1 and are flagged.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> constant;

  static Standardization fit(const Matrix& train);
  Matrix apply(const Matrix& m) const;
  void apply_in_place(std::span<double> row) const;
};

struct StandardizedPair {
  Matrix train;
  Matrix apply_to;
  Standardization stats;
};

/// Z-scores both matrices with statistics of `train` only.
StandardizedPair standardize(const Matrix& train, const Matrix& apply_to);

std::string format_feature_matrix(const FeatureMatrix& m);
FeatureMatrix parse_feature_matrix(std::string_view csv);

}  // namespace magprint
