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
#include <filesystem>
#include <string>
#include <string_view>

#include "magprint/features.hpp"
#include "magprint/multiclass.hpp"

namespace magprint {

inline constexpr std::string_view kModelHeader = "magprint-model v1";

/// A trained OAO ensemble together with the feature mask and the
/// standardization fitted on its training rows.
struct Classifier {
  FeatureMask mask;
  Standardization stats;
  OaoModel oao;

  /// Takes the full 18-feature vector.
  OaoPrediction predict(std::span<const double> features) const;
};

Classifier train_classifier(const FeatureMatrix& matrix, const FeatureMask& mask, const SvmHyperParams& hyper,
                            const SmoOptions& smo = {}, Warnings* warnings = nullptr);

std::string format_model(const Classifier& model);
/// Throws CorruptModel (empty, malformed or checksum mismatch) or
/// FormatVersionMismatch.
Classifier parse_model(std::string_view text);

void save_model(const Classifier& model, const std::filesystem::path& path);
Classifier load_model(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace magprint
