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

#include "magprint/features.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>

#include <fftw3.h>

#include "magprint/text_io.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "features";
using cd = std::complex<double>;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

[[noreturn]] void degenerate(const std::string& block) {
  throw Error(Errc::DegenerateSegment, std::string(kModule),
              block + " sequence has zero spread; skewness and kurtosis are undefined");
}

}  // namespace

StatBlock statistical_block(std::span<const double> s, const FeatureOptions& opts) {
  if (s.size() < 2) {
    throw Error(Errc::SegmentTooShort, std::string(kModule),
                "need at least 2 samples, got " + std::to_string(s.size()));
  }
  const double n = static_cast<double>(s.size());
  double mean = 0.0, ms = 0.0, shannon = 0.0, log_energy = 0.0;
  for (double v : s) {
    const double sq = v * v;
    const double ln = std::log(std::max(sq, opts.log_floor));
    shannon -= sq * ln;
    log_energy += ln;
    mean += v;
    ms += sq;
  }
  mean /= n;
  const double rms = std::sqrt(ms / n);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0, p3 = 0.0, p4 = 0.0;
  for (double v : s) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    p3 += v * v * v;
    p4 += v * v * v * v;
  }
  const double variance = m2 / (n - 1.0);
  const double sigma = std::sqrt(variance);

  StatBlock block;
  block.values = {shannon, log_energy, sigma, variance, std::nan(""), std::nan("")};
  if (!(sigma > 1e-12 * rms)) {
    block.degenerate = true;
    return block;
  }
  if (opts.classical_moments) {
    const double pm2 = m2 / n;
    block.values[4] = (m3 / n) / std::pow(pm2, 1.5);
    block.values[5] = (m4 / n) / (pm2 * pm2);
  } else {
    const double mu3 = mean * mean * mean;
    block.values[4] = (p3 - n * mu3) / (sigma * sigma * sigma);
    block.values[5] = (p4 - n * mu3 * mean) / (variance * variance);
  }
  return block;
}

std::array<double, 6> time_features(std::span<const double> s, const FeatureOptions& opts) {
  auto block = statistical_block(s, opts);
  if (block.degenerate) degenerate("time-domain");
  return block.values;
}

std::vector<std::complex<double>> dft(std::span<const double> s) {
  const std::size_t n = s.size();
  std::vector<cd> out(n);
  if (n == 0) return out;
  const std::size_t half = n / 2 + 1;
  double* in = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(half);
  std::copy(s.begin(), s.end(), in);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, spec, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  for (std::size_t k = 0; k < half; ++k) out[k] = {spec[k][0], spec[k][1]};
  for (std::size_t k = half; k < n; ++k) out[k] = std::conj(out[n - k]);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spec);
  fftw_free(in);
  return out;
}

PolarSpectrum polar_spectrum(std::span<const double> s) {
  const auto spectrum = dft(s);
  const std::size_t n = s.size();
  double l1 = 0.0;
  for (double v : s) l1 += std::abs(v);
  const double zero_tol = 1e-13 * l1;

  PolarSpectrum out;
  out.phase.resize(n);
  out.amplitude.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd x = spectrum[k];
    if (k == 0 || (n % 2 == 0 && k == n / 2)) x = {x.real(), 0.0};
    const double amp = std::abs(x);
    if (!(amp > zero_tol)) {
      out.amplitude[k] = 0.0;
      out.phase[k] = 0.0;
      continue;
    }
    out.amplitude[k] = amp;
    double ph = std::atan2(x.imag(), x.real());
    if (ph <= -std::numbers::pi) ph = std::numbers::pi;
    out.phase[k] = ph;
  }
  return out;
}

std::array<double, 12> spectral_features(std::span<const double> s, const FeatureOptions& opts) {
  if (s.size() < 2) {
    throw Error(Errc::SegmentTooShort, std::string(kModule),
                "need at least 2 samples, got " + std::to_string(s.size()));
  }
  const auto polar = polar_spectrum(s);
  const auto phase = statistical_block(polar.phase, opts);
  if (phase.degenerate) degenerate("DFT phase");
  const auto amplitude = statistical_block(polar.amplitude, opts);
  if (amplitude.degenerate) degenerate("DFT amplitude");
  std::array<double, 12> out{};
  std::copy(phase.values.begin(), phase.values.end(), out.begin());
  std::copy(amplitude.values.begin(), amplitude.values.end(), out.begin() + 6);
  return out;
}

std::array<double, kFeatureCount> extract_features(std::span<const double> s, const FeatureOptions& opts) {
  const auto t = time_features(s, opts);
  const auto f = spectral_features(s, opts);
  std::array<double, kFeatureCount> out{};
  std::copy(t.begin(), t.end(), out.begin());
  std::copy(f.begin(), f.end(), out.begin() + 6);
  return out;
}

// --- FeatureMask ---------------------------------------------------------

FeatureMask::FeatureMask(std::initializer_list<int> indices) : FeatureMask(std::vector<int>(indices)) {}

FeatureMask::FeatureMask(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  for (int i : indices_) {
    if (i < 1 || i > kFeatureCount) {
      throw Error(Errc::InvalidSpec, std::string(kModule),
                  "feature index " + std::to_string(i) + " outside 1..18");
    }
  }
}

FeatureMask FeatureMask::all() {
  std::vector<int> v(kFeatureCount);
  for (int i = 0; i < kFeatureCount; ++i) v[i] = i + 1;
  return FeatureMask(std::move(v));
}

FeatureMask FeatureMask::parse(std::string_view text) {
  std::string cleaned(text);
  for (char& c : cleaned) {
    if (c == ',' || c == '[' || c == ']' || c == ';') c = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<int> v;
  std::string tok;
  while (in >> tok) v.push_back(static_cast<int>(parse_int_field(tok, kModule, "feature mask")));
  return FeatureMask(std::move(v));
}

bool FeatureMask::contains(int index) const {
  return std::binary_search(indices_.begin(), indices_.end(), index);
}

bool FeatureMask::contains(const FeatureMask& other) const {
  return std::includes(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end());
}

FeatureMask FeatureMask::with(int index) const {
  auto v = indices_;
  v.push_back(index);
  return FeatureMask(std::move(v));
}

std::vector<std::size_t> FeatureMask::columns() const {
  std::vector<std::size_t> out;
  out.reserve(indices_.size());
  for (int i : indices_) out.push_back(static_cast<std::size_t>(i - 1));
  return out;
}

std::string FeatureMask::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(indices_[i]);
  }
  return out + "]";
}

// --- FeatureMatrix -------------------------------------------------------

std::vector<std::string> FeatureMatrix::class_labels() const {
  std::set<std::string> s;
  for (const auto& r : rows) s.insert(r.device_id);
  return {s.begin(), s.end()};
}

std::map<std::string, std::size_t> FeatureMatrix::row_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : rows) ++counts[r.device_id];
  return counts;
}

std::vector<std::string> FeatureMatrix::labels() const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.device_id);
  return out;
}

Matrix FeatureMatrix::project(const FeatureMask& m) const {
  const auto cols = m.columns();
  Matrix out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = rows[r].values[cols[c]];
  }
  return out;
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> idx) const {
  FeatureMatrix out;
  out.mask = mask;
  out.rows.reserve(idx.size());
  for (auto i : idx) out.rows.push_back(rows[i]);
  return out;
}

FeatureMatrix build_feature_matrix(const std::vector<ResponseSegment>& segments,
                                   const FeatureOptions& opts, std::vector<DroppedRow>* dropped) {
  FeatureMatrix out;
  if (segments.empty()) return out;
  const std::size_t length = segments.front().samples.size();
  for (const auto& seg : segments) {
    if (seg.samples.size() != length) {
      throw Error(Errc::DimensionMismatch, std::string(kModule),
                  "segments must share one length (" + std::to_string(length) + " vs " +
                      std::to_string(seg.samples.size()) + ")");
    }
  }
  out.rows.reserve(segments.size());
  for (const auto& seg : segments) {
    try {
      FeatureVector fv;
      fv.values = extract_features(seg.samples, opts);
      fv.device_id = seg.device_id;
      fv.session_id = seg.session_id;
      fv.segment_index = seg.index;
      out.rows.push_back(std::move(fv));
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateSegment) throw;
      if (dropped) dropped->push_back({seg.device_id, seg.session_id, seg.index, e.message()});
    }
  }
  return out;
}

// --- Standardization -----------------------------------------------------

Standardization Standardization::fit(const Matrix& train) {
  if (train.empty()) throw Error(Errc::EmptyTrain, std::string(kModule), "cannot standardize an empty matrix");
  const std::size_t d = train.cols();
  const double n = static_cast<double>(train.rows());
  Standardization st;
  st.mean.assign(d, 0.0);
  st.stddev.assign(d, 1.0);
  st.constant.assign(d, false);
  for (std::size_t r = 0; r < train.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) st.mean[c] += train(r, c);
  }
  for (auto& m : st.mean) m /= n;
  std::vector<double> ss(d, 0.0);
  for (std::size_t r = 0; r < train.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = train(r, c) - st.mean[c];
      ss[c] += dv * dv;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = train.rows() > 1 ? std::sqrt(ss[c] / (n - 1.0)) : 0.0;
    if (sd > 1e-12 * std::max(1.0, std::abs(st.mean[c]))) {
      st.stddev[c] = sd;
    } else {
      st.constant[c] = true;
    }
  }
  return st;
}

void Standardization::apply_in_place(std::span<double> row) const {
  if (row.size() != mean.size()) {
    throw Error(Errc::DimensionMismatch, std::string(kModule),
                "row width " + std::to_string(row.size()) + " vs " + std::to_string(mean.size()));
  }
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / stddev[c];
}

Matrix Standardization::apply(const Matrix& m) const {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) apply_in_place(out.row(r));
  return out;
}

StandardizedPair standardize(const Matrix& train, const Matrix& apply_to) {
  auto stats = Standardization::fit(train);
  return {stats.apply(train), stats.apply(apply_to), std::move(stats)};
}

// --- CSV -----------------------------------------------------------------

std::string format_feature_matrix(const FeatureMatrix& m) {
  std::string out = "device_id,session_id,segment_index";
  for (int i = 1; i <= kFeatureCount; ++i) out += ",f" + std::to_string(i);
  out += '\n';
  for (const auto& r : m.rows) {
    out += r.device_id + "," + r.session_id + "," + std::to_string(r.segment_index);
    for (double v : r.values) {
      out += ',';
      out += format_exact(v);
    }
    out += '\n';
  }
  return out;
}

FeatureMatrix parse_feature_matrix(std::string_view csv) {
  auto lines = split_lines(csv);
  FeatureMatrix out;
  if (lines.empty() || trim(lines[0]).empty()) return out;
  auto header = split_csv(lines[0]);
  if (header.size() != 3 + kFeatureCount || header[0] != "device_id") {
    throw Error(Errc::ParseError, std::string(kModule), "line 1: bad feature header");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto f = split_csv(lines[i]);
    const std::string where = "line " + std::to_string(i + 1);
    if (f.size() != header.size()) {
      throw Error(Errc::ParseError, std::string(kModule), where + ": expected 21 columns");
    }
    FeatureVector fv;
    fv.device_id = std::string(f[0]);
    fv.session_id = std::string(f[1]);
    fv.segment_index = static_cast<int>(parse_int_field(f[2], kModule, where));
    for (int c = 0; c < kFeatureCount; ++c) fv.values[c] = parse_double_field(f[3 + c], kModule, where);
    out.rows.push_back(std::move(fv));
  }
  return out;
}

}  // namespace magprint
