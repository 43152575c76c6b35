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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "magprint/features.hpp"
#include "magprint/preprocess.hpp"

namespace testutil {

inline std::vector<double> random_normalized(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.3, 1.0);
  std::vector<double> s(n);
  double ms = 0.0;
  for (auto& v : s) {
    v = d(rng);
    ms += v * v;
  }
  const double rms = std::sqrt(ms / n);
  for (auto& v : s) v /= rms;
  return s;
}

// Rows of `classes` labels whose planted columns (1-based) shift with the
// class and whose other columns are pure noise.
inline magprint::FeatureMatrix planted_matrix(const std::vector<std::string>& classes, std::size_t per_class,
                                              const std::vector<int>& informative, double separation,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  magprint::FeatureMatrix m;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (std::size_t r = 0; r < per_class; ++r) {
      magprint::FeatureVector v;
      v.device_id = classes[c];
      v.session_id = "s";
      v.segment_index = static_cast<int>(r);
      for (auto& x : v.values) x = noise(rng);
      for (std::size_t k = 0; k < informative.size(); ++k) {
        const double angle = 2.0 * 3.141592653589793 * c / classes.size() + k;
        v.values[informative[k] - 1] += separation * std::cos(angle + k * 1.3);
      }
      m.rows.push_back(v);
    }
  }
  return m;
}

inline magprint::ResponseSegment segment_of(std::string device, int index, std::vector<double> samples) {
  magprint::ResponseSegment s;
  s.device_id = std::move(device);
  s.session_id = "s1";
  s.index = index;
  s.samples = std::move(samples);
  return s;
}

}  // namespace testutil
