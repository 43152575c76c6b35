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
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "magprint/stimulus.hpp"

namespace magprint {

/// Parametric magnetometer: every field maps to one imperfection of the
/// response kernel used by simulate_session.
struct DeviceSignature {
  std::string device_id;
  std::string model_id;
  std::array<double, 3> axis_gain{1.0, 1.0, 1.0};
  double lag_time_constant_ms = 120.0;
  double ring_frequency_hz = 2.0;
  double ring_damping = 0.2;
  double hysteresis_offset = 0.0;
  double quantization_step = 0.15;
  double noise_sigma = 0.3;
  double nonlinearity_coeff = 0.0;

  friend bool operator==(const DeviceSignature&, const DeviceSignature&) = default;
};

/// Relative standard deviation applied per field when drawing devices of a model.
struct SignatureSpread {
  double axis_gain = 0.0;
  double lag_time_constant = 0.0;
  double ring_frequency = 0.0;
  double ring_damping = 0.0;
  double hysteresis_offset = 0.0;
  double quantization_step = 0.0;
  double noise_sigma = 0.0;
  double nonlinearity_coeff = 0.0;
};

struct ModelSpec {
  std::string model_id;
  DeviceSignature mean;
  SignatureSpread spread;
  int device_count = 1;
};

struct ParkSpec {
  std::vector<ModelSpec> models;
  std::uint64_t rng_seed = 42;
};

void validate_signature(const DeviceSignature& sig);

/// Draws every device of the park. Devices are named `<model>-<k>` (k from 1)
/// and listed model by model in spec order.
std::vector<DeviceSignature> make_park(const ParkSpec& spec);

/// Four models with 3/1/3/2 devices (nine in total).
ParkSpec default_park_spec(std::uint64_t seed = 42);

ParkSpec parse_park_spec(std::string_view text);
ParkSpec load_park_spec(const std::filesystem::path& path);
std::string format_park_spec(const ParkSpec& spec);

struct MagSample {
  double t_ms = 0.0;
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;

  friend bool operator==(const MagSample&, const MagSample&) = default;
};

struct Trace {
  std::string device_id;
  std::string session_id;
  double sample_rate_hz = 20.0;
  std::vector<MagSample> samples;
};

struct SessionOptions {
  std::string session_id = "session";
  double sample_rate_hz = 20.0;
  /// Quiet recording before the first pulse; trace time is stimulus time, so
  /// the first sample sits at -lead_in_ms.
  double lead_in_ms = 2000.0;
  /// Playback latency of each burst, uniform in [0, latency_jitter_ms).
  double latency_jitter_ms = 30.0;
  /// Extra per-pulse timing offset, uniform in [0, pulse_jitter_ms); models
  /// the sensor clock running unsynchronized with the stimulus.
  double pulse_jitter_ms = 50.0;
  /// Field (microtesla) produced at unit gain and unit stimulus amplitude.
  double field_scale_ut = 25.0;
};

/// Relative overshoot of the damped ringing superposed on the lag response.
inline constexpr double kRingAmplitude = 0.3;

/// Noise-free normalized step response of the device kernel at `tau_ms` after
/// an edge: (1 - exp(-tau/T)) * (1 + k * exp(-zeta*w*tau) * sin(w*tau)).
double step_response(const DeviceSignature& sig, double tau_ms);

Trace simulate_session(const DeviceSignature& sig, const PulseSchedule& schedule,
                       const WaveformSpec& spec, const SessionOptions& options,
                       std::uint64_t rng_seed);

/// Adds white Gaussian noise with power mean(x^2) / 10^(snr_db/10). An
/// infinite SNR returns the input unchanged.
std::vector<double> add_awgn(std::span<const double> samples, double snr_db, std::uint64_t rng_seed);

}  // namespace magprint
