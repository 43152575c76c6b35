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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "magprint/error.hpp"

namespace magprint {

/// Minimum inter-pulse gap (ms) that lets a consumer magnetometer settle.
inline constexpr double kHysteresisGuardMs = 500.0;

/// Square-wave stimulation pattern. A burst is `pulse_count_per_burst` pulses
/// of `pulse_width_ms`, each followed by `inter_pulse_gap_ms` of silence; an
/// extra `burst_gap_ms` of silence closes every burst. One burst elicits one
/// response from the device.
struct WaveformSpec {
  std::string id = "custom";
  int pulse_count_per_burst = 1;
  double pulse_width_ms = 1000.0;
  double inter_pulse_gap_ms = 500.0;
  double burst_gap_ms = 0.0;
  int burst_repetitions = 260;
  double amplitude = 1.0;

  double burst_period_ms() const {
    return pulse_count_per_burst * (pulse_width_ms + inter_pulse_gap_ms) + burst_gap_ms;
  }
  double total_duration_ms() const { return burst_repetitions * burst_period_ms(); }
};

/// Checks the spec invariants, throwing InvalidSpec on violations. A gap
/// shorter than the hysteresis guard is a warning, or an error when `strict`.
Warnings validate_waveform(const WaveformSpec& spec, bool strict = false);

/// Built-in patterns: "A" (short), "B" (medium, about one hour for 260
/// bursts) and "C" (long). Throws InvalidSpec for other ids.
WaveformSpec waveform_preset(std::string_view id);

struct PulseSchedule {
  std::vector<double> onsets_ms;
  double pulse_width_ms = 0.0;
  int pulses_per_burst = 1;
  double total_duration_ms = 0.0;

  /// Onset of the first pulse of every burst.
  std::vector<double> burst_onsets_ms() const;
};

PulseSchedule pulse_onsets(const WaveformSpec& spec);

/// Renders the stimulus on a uniform grid t_n = n / sample_rate. A sample is
/// high when it falls inside [onset, onset + width) of some pulse.
std::vector<double> build_waveform(const WaveformSpec& spec, double sample_rate_hz);

/// Mono 16-bit signed little-endian PCM in a RIFF/WAVE container. Samples are
/// clamped to [-1, 1] and scaled so that 1.0 maps to 32767.
std::vector<std::uint8_t> export_pcm(std::span<const double> signal, int pcm_rate_hz = 44100);

WaveformSpec parse_waveform_spec(std::string_view text);
WaveformSpec load_waveform_spec(const std::filesystem::path& path);
std::string format_waveform_spec(const WaveformSpec& spec);

}  // namespace magprint
