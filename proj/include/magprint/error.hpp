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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace magprint {

enum class Errc {
  InvalidSpec,
  SampleRateTooLow,
  IoError,
  ZeroSignalPower,
  ParseError,
  NonMonotonicTimestamps,
  IrregularSampling,
  EmptyTrace,
  MissingTraceFile,
  SignalTooShort,
  NoResponseDetected,
  ZeroSegment,
  DegenerateSegment,
  SegmentTooShort,
  DimensionMismatch,
  SingleClassInput,
  EmptyTrain,
  TooFewSamples,
  EmptyCounts,
  EmptyScores,
  MissingDay,
  UnknownLabel,
  FormatVersionMismatch,
  CorruptModel,
  UsageError,
};

std::string_view errc_name(Errc code) noexcept;

/// Domain error carrying a machine-readable code and the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string module, const std::string& message);

  Errc code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string module_;
  std::string message_;
};

/// Non-fatal diagnostics collected by operations that accept a sink.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace magprint
