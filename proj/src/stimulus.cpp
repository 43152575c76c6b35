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

#include "magprint/stimulus.hpp"

#include <algorithm>
#include <cmath>

#include "magprint/text_io.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "stimulus";

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidSpec, std::string(kModule), what); }

// Index of the first grid sample at or after time t (ms).
std::size_t first_sample_at_or_after(double t_ms, double rate_hz) {
  double pos = t_ms * rate_hz / 1000.0;
  return static_cast<std::size_t>(std::max(0.0, std::ceil(pos - 1e-9)));
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Warnings validate_waveform(const WaveformSpec& spec, bool strict) {
  if (spec.id.empty()) invalid("waveform id must be non-empty");
  if (spec.pulse_count_per_burst < 1) invalid("pulse_count_per_burst must be >= 1");
  if (!(spec.pulse_width_ms > 0)) invalid("pulse_width must be > 0");
  if (!(spec.inter_pulse_gap_ms > 0)) invalid("inter_pulse_gap must be > 0");
  if (!(spec.burst_gap_ms >= 0)) invalid("burst_gap must be >= 0");
  if (spec.burst_repetitions < 1) invalid("burst_repetitions must be >= 1");
  if (!(spec.amplitude >= 0 && spec.amplitude <= 1)) invalid("amplitude must lie in [0, 1]");

  Warnings warnings;
  if (spec.inter_pulse_gap_ms < kHysteresisGuardMs) {
    std::string msg = "inter_pulse_gap " + format_exact(spec.inter_pulse_gap_ms) +
                      " ms is below the hysteresis guard of " + format_exact(kHysteresisGuardMs) +
                      " ms";
    if (strict) invalid(msg);
    warnings.push_back(msg);
  }
  return warnings;
}

WaveformSpec waveform_preset(std::string_view id) {
  // Pulses of 500 ms; A, B and C carry 1, 2 and 4 per burst. B's burst
  // period is 13.846 s, so its 260 bursts take about one hour.
  WaveformSpec spec;
  spec.pulse_width_ms = 500.0;
  spec.inter_pulse_gap_ms = 500.0;
  spec.burst_gap_ms = 11846.0;
  spec.burst_repetitions = 260;
  spec.amplitude = 1.0;
  if (id == "A") {
    spec.pulse_count_per_burst = 1;
  } else if (id == "B") {
    spec.pulse_count_per_burst = 2;
  } else if (id == "C") {
    spec.pulse_count_per_burst = 4;
  } else {
    invalid("unknown waveform preset '" + std::string(id) + "' (expected A, B or C)");
  }
  spec.id = std::string(id);
  return spec;
}

std::vector<double> PulseSchedule::burst_onsets_ms() const {
  std::vector<double> out;
  const auto step = static_cast<std::size_t>(std::max(1, pulses_per_burst));
  for (std::size_t i = 0; i < onsets_ms.size(); i += step) out.push_back(onsets_ms[i]);
  return out;
}

PulseSchedule pulse_onsets(const WaveformSpec& spec) {
  validate_waveform(spec);
  PulseSchedule schedule;
  schedule.pulse_width_ms = spec.pulse_width_ms;
  schedule.pulses_per_burst = spec.pulse_count_per_burst;
  schedule.total_duration_ms = spec.total_duration_ms();
  const double period = spec.burst_period_ms();
  const double spacing = spec.pulse_width_ms + spec.inter_pulse_gap_ms;
  schedule.onsets_ms.reserve(static_cast<std::size_t>(spec.burst_repetitions) *
                             spec.pulse_count_per_burst);
  for (int b = 0; b < spec.burst_repetitions; ++b) {
    for (int p = 0; p < spec.pulse_count_per_burst; ++p) {
      schedule.onsets_ms.push_back(b * period + p * spacing);
    }
  }
  return schedule;
}

std::vector<double> build_waveform(const WaveformSpec& spec, double sample_rate_hz) {
  validate_waveform(spec);
  if (!(sample_rate_hz > 0)) invalid("sample rate must be > 0");
  const double width_samples = spec.pulse_width_ms * sample_rate_hz / 1000.0;
  const double gap_samples = spec.inter_pulse_gap_ms * sample_rate_hz / 1000.0;
  if (width_samples < 2.0 - 1e-9 || gap_samples < 1.0 - 1e-9) {
    throw Error(Errc::SampleRateTooLow, std::string(kModule),
                "sample rate " + format_exact(sample_rate_hz) +
                    " Hz cannot represent the pulse width and gap");
  }

  const auto schedule = pulse_onsets(spec);
  const std::size_t n = first_sample_at_or_after(schedule.total_duration_ms, sample_rate_hz);
  std::vector<double> signal(n, 0.0);
  for (double onset : schedule.onsets_ms) {
    std::size_t begin = first_sample_at_or_after(onset, sample_rate_hz);
    std::size_t end = std::min(n, first_sample_at_or_after(onset + spec.pulse_width_ms, sample_rate_hz));
    for (std::size_t i = begin; i < end; ++i) signal[i] = spec.amplitude;
  }
  return signal;
}

std::vector<std::uint8_t> export_pcm(std::span<const double> signal, int pcm_rate_hz) {
  if (signal.empty()) invalid("cannot export an empty signal");
  if (pcm_rate_hz <= 0) invalid("PCM rate must be positive");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(signal.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_le32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_le32(out, 16);
  put_le16(out, 1);  // PCM
  put_le16(out, 1);  // mono
  put_le32(out, static_cast<std::uint32_t>(pcm_rate_hz));
  put_le32(out, static_cast<std::uint32_t>(pcm_rate_hz) * 2);
  put_le16(out, 2);
  put_le16(out, 16);
  put_tag(out, "data");
  put_le32(out, data_bytes);
  for (double v : signal) {
    double clamped = std::clamp(v, -1.0, 1.0);
    auto s = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    put_le16(out, static_cast<std::uint16_t>(s));
  }
  return out;
}

WaveformSpec parse_waveform_spec(std::string_view text) {
  WaveformSpec spec;
  bool have_preset = false;
  for (const auto& kv : parse_key_values(text, kModule)) {
    const std::string where = "line " + std::to_string(kv.line) + " '" + kv.key + "'";
    if (kv.key == "preset") {
      if (have_preset) invalid(where + ": preset must come first and only once");
      spec = waveform_preset(kv.value);
      have_preset = true;
    } else if (kv.key == "id") {
      spec.id = kv.value;
    } else if (kv.key == "pulse_count_per_burst") {
      spec.pulse_count_per_burst = static_cast<int>(parse_int_field(kv.value, kModule, where));
    } else if (kv.key == "pulse_width_ms") {
      spec.pulse_width_ms = parse_double_field(kv.value, kModule, where);
    } else if (kv.key == "inter_pulse_gap_ms") {
      spec.inter_pulse_gap_ms = parse_double_field(kv.value, kModule, where);
    } else if (kv.key == "burst_gap_ms") {
      spec.burst_gap_ms = parse_double_field(kv.value, kModule, where);
    } else if (kv.key == "burst_repetitions") {
      spec.burst_repetitions = static_cast<int>(parse_int_field(kv.value, kModule, where));
    } else if (kv.key == "amplitude") {
      spec.amplitude = parse_double_field(kv.value, kModule, where);
    } else {
      throw Error(Errc::ParseError, std::string(kModule), where + ": unknown key");
    }
  }
  return spec;
}

WaveformSpec load_waveform_spec(const std::filesystem::path& path) {
  return parse_waveform_spec(read_text_file(path, kModule));
}

std::string format_waveform_spec(const WaveformSpec& spec) {
  std::string out;
  out += "id = " + spec.id + "\n";
  out += "pulse_count_per_burst = " + std::to_string(spec.pulse_count_per_burst) + "\n";
  out += "pulse_width_ms = " + format_exact(spec.pulse_width_ms) + "\n";
  out += "inter_pulse_gap_ms = " + format_exact(spec.inter_pulse_gap_ms) + "\n";
  out += "burst_gap_ms = " + format_exact(spec.burst_gap_ms) + "\n";
  out += "burst_repetitions = " + std::to_string(spec.burst_repetitions) + "\n";
  out += "amplitude = " + format_exact(spec.amplitude) + "\n";
  return out;
}

}  // namespace magprint
