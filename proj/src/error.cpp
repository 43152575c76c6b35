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

#include "magprint/error.hpp"

namespace magprint {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::SampleRateTooLow: return "SampleRateTooLow";
    case Errc::IoError: return "IoError";
    case Errc::ZeroSignalPower: return "ZeroSignalPower";
    case Errc::ParseError: return "ParseError";
    case Errc::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case Errc::IrregularSampling: return "IrregularSampling";
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::MissingTraceFile: return "MissingTraceFile";
    case Errc::SignalTooShort: return "SignalTooShort";
    case Errc::NoResponseDetected: return "NoResponseDetected";
    case Errc::ZeroSegment: return "ZeroSegment";
    case Errc::DegenerateSegment: return "DegenerateSegment";
    case Errc::SegmentTooShort: return "SegmentTooShort";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SingleClassInput: return "SingleClassInput";
    case Errc::EmptyTrain: return "EmptyTrain";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::EmptyCounts: return "EmptyCounts";
    case Errc::EmptyScores: return "EmptyScores";
    case Errc::MissingDay: return "MissingDay";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::FormatVersionMismatch: return "FormatVersionMismatch";
    case Errc::CorruptModel: return "CorruptModel";
    case Errc::UsageError: return "UsageError";
  }
  return "Unknown";
}

Error::Error(Errc code, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + std::string(errc_name(code)) + ": " + message),
      code_(code),
      module_(std::move(module)),
      message_(message) {}

}  // namespace magprint
