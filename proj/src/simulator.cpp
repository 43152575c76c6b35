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

#include "magprint/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "magprint/text_io.hpp"

namespace magprint {

namespace {

constexpr std::string_view kModule = "simulator";

[[noreturn]] void invalid(const std::string& what) {
  throw Error(Errc::InvalidSpec, std::string(kModule), what);
}

double perturb(double mean, double rel_sd, std::mt19937_64& rng) {
  if (rel_sd <= 0) return mean;
  std::normal_distribution<double> n(0.0, rel_sd);
  return mean * (1.0 + n(rng));
}

// Time after an edge beyond which the kernel has settled to within 1e-12.
double settle_horizon_ms(const DeviceSignature& sig) {
  double horizon = 28.0 * sig.lag_time_constant_ms;
  const double decay = sig.ring_damping * 2.0 * std::numbers::pi * sig.ring_frequency_hz / 1000.0;
  if (sig.ring_frequency_hz > 0) {
    if (decay <= 0) return HUGE_VAL;
    horizon = std::max(horizon, 28.0 / decay);
  }
  return horizon;
}

}  // namespace

void validate_signature(const DeviceSignature& sig) {
  for (double g : sig.axis_gain) {
    if (!(g > 0)) invalid(sig.device_id + ": axis_gain components must be > 0");
  }
  if (!(sig.lag_time_constant_ms > 0)) invalid(sig.device_id + ": lag_time_constant must be > 0");
  if (!(sig.ring_frequency_hz >= 0)) invalid(sig.device_id + ": ring_frequency must be >= 0");
  if (!(sig.ring_damping >= 0)) invalid(sig.device_id + ": ring_damping must be >= 0");
  if (!(sig.quantization_step > 0)) invalid(sig.device_id + ": quantization_step must be > 0");
  if (!(sig.noise_sigma >= 0)) invalid(sig.device_id + ": noise_sigma must be >= 0");
}

std::vector<DeviceSignature> make_park(const ParkSpec& spec) {
  if (spec.models.empty()) invalid("park has no models");
  std::mt19937_64 rng(spec.rng_seed);
  std::vector<DeviceSignature> devices;
  for (const auto& model : spec.models) {
    if (model.model_id.empty()) invalid("model id must be non-empty");
    if (model.device_count < 1) invalid(model.model_id + ": device count must be >= 1");
    const auto& s = model.spread;
    for (double v : {s.axis_gain, s.lag_time_constant, s.ring_frequency, s.ring_damping,
                     s.hysteresis_offset, s.quantization_step, s.noise_sigma, s.nonlinearity_coeff}) {
      if (!(v >= 0)) invalid(model.model_id + ": spreads must be >= 0");
    }
    for (int k = 0; k < model.device_count; ++k) {
      DeviceSignature d = model.mean;
      d.model_id = model.model_id;
      d.device_id = model.model_id + "-" + std::to_string(k + 1);
      for (auto& g : d.axis_gain) g = perturb(g, s.axis_gain, rng);
      d.lag_time_constant_ms = perturb(d.lag_time_constant_ms, s.lag_time_constant, rng);
      d.ring_frequency_hz = perturb(d.ring_frequency_hz, s.ring_frequency, rng);
      d.ring_damping = perturb(d.ring_damping, s.ring_damping, rng);
      d.hysteresis_offset = perturb(d.hysteresis_offset, s.hysteresis_offset, rng);
      d.quantization_step = perturb(d.quantization_step, s.quantization_step, rng);
      d.noise_sigma = perturb(d.noise_sigma, s.noise_sigma, rng);
      d.nonlinearity_coeff = perturb(d.nonlinearity_coeff, s.nonlinearity_coeff, rng);
      validate_signature(d);
      devices.push_back(std::move(d));
    }
  }
  return devices;
}

ParkSpec default_park_spec(std::uint64_t seed) {
  SignatureSpread intra;
  intra.axis_gain = 0.01;
  intra.lag_time_constant = 0.015;
  intra.ring_frequency = 0.01;
  intra.ring_damping = 0.015;
  intra.hysteresis_offset = 0.015;
  intra.nonlinearity_coeff = 0.015;

  auto model = [&](std::string id, int count, std::array<double, 3> gain, double lag_ms,
                   double ring_hz, double damping, double offset, double nonlin) {
    ModelSpec m;
    m.model_id = std::move(id);
    m.device_count = count;
    m.mean.axis_gain = gain;
    m.mean.lag_time_constant_ms = lag_ms;
    m.mean.ring_frequency_hz = ring_hz;
    m.mean.ring_damping = damping;
    m.mean.hysteresis_offset = offset;
    m.mean.quantization_step = 0.15;
    m.mean.noise_sigma = 0.4;
    m.mean.nonlinearity_coeff = nonlin;
    m.spread = intra;
    return m;
  };

  ParkSpec spec;
  spec.rng_seed = seed;
  spec.models = {
      model("htc", 3, {0.6, 0.5, 0.7}, 110.0, 1.6, 0.20, 1.5, 0.10),
      model("huawei", 1, {0.8, 0.4, 0.5}, 190.0, 2.6, 0.32, 3.0, -0.05),
      model("samsung", 3, {0.5, 0.7, 0.6}, 75.0, 3.4, 0.12, 0.8, 0.22),
      model("sony", 2, {0.7, 0.6, 0.4}, 150.0, 2.1, 0.45, 2.2, -0.15),
  };
  return spec;
}

ParkSpec parse_park_spec(std::string_view text) {
  ParkSpec spec;
  ModelSpec* current = nullptr;
  for (const auto& kv : parse_key_values(text, kModule)) {
    const std::string where = "line " + std::to_string(kv.line) + " '" + kv.key + "'";
    auto num = [&] { return parse_double_field(kv.value, kModule, where); };
    if (kv.key == "seed") {
      spec.rng_seed = static_cast<std::uint64_t>(parse_int_field(kv.value, kModule, where));
      continue;
    }
    if (kv.key == "model") {
      spec.models.emplace_back();
      current = &spec.models.back();
      current->model_id = kv.value;
      continue;
    }
    if (current == nullptr) {
      throw Error(Errc::ParseError, std::string(kModule), where + ": key outside a model block");
    }
    auto& m = current->mean;
    auto& s = current->spread;
    if (kv.key == "devices") {
      current->device_count = static_cast<int>(parse_int_field(kv.value, kModule, where));
    } else if (kv.key == "axis_gain") {
      auto parts = split_csv(kv.value);
      if (parts.size() != 3) {
        throw Error(Errc::ParseError, std::string(kModule), where + ": expected three values");
      }
      for (int i = 0; i < 3; ++i) m.axis_gain[i] = parse_double_field(parts[i], kModule, where);
    } else if (kv.key == "lag_time_constant_ms") {
      m.lag_time_constant_ms = num();
    } else if (kv.key == "ring_frequency_hz") {
      m.ring_frequency_hz = num();
    } else if (kv.key == "ring_damping") {
      m.ring_damping = num();
    } else if (kv.key == "hysteresis_offset") {
      m.hysteresis_offset = num();
    } else if (kv.key == "quantization_step") {
      m.quantization_step = num();
    } else if (kv.key == "noise_sigma") {
      m.noise_sigma = num();
    } else if (kv.key == "nonlinearity_coeff") {
      m.nonlinearity_coeff = num();
    } else if (kv.key == "spread.axis_gain") {
      s.axis_gain = num();
    } else if (kv.key == "spread.lag_time_constant") {
      s.lag_time_constant = num();
    } else if (kv.key == "spread.ring_frequency") {
      s.ring_frequency = num();
    } else if (kv.key == "spread.ring_damping") {
      s.ring_damping = num();
    } else if (kv.key == "spread.hysteresis_offset") {
      s.hysteresis_offset = num();
    } else if (kv.key == "spread.quantization_step") {
      s.quantization_step = num();
    } else if (kv.key == "spread.noise_sigma") {
      s.noise_sigma = num();
    } else if (kv.key == "spread.nonlinearity_coeff") {
      s.nonlinearity_coeff = num();
    } else {
      throw Error(Errc::ParseError, std::string(kModule), where + ": unknown key");
    }
  }
  if (spec.models.empty()) throw Error(Errc::ParseError, std::string(kModule), "no model blocks");
  return spec;
}

ParkSpec load_park_spec(const std::filesystem::path& path) {
  return parse_park_spec(read_text_file(path, kModule));
}

std::string format_park_spec(const ParkSpec& spec) {
  std::string out = "seed = " + std::to_string(spec.rng_seed) + "\n";
  for (const auto& m : spec.models) {
    const auto& d = m.mean;
    const auto& s = m.spread;
    out += "\nmodel = " + m.model_id + "\n";
    out += "devices = " + std::to_string(m.device_count) + "\n";
    out += "axis_gain = " + format_exact(d.axis_gain[0]) + ", " + format_exact(d.axis_gain[1]) +
           ", " + format_exact(d.axis_gain[2]) + "\n";
    out += "lag_time_constant_ms = " + format_exact(d.lag_time_constant_ms) + "\n";
    out += "ring_frequency_hz = " + format_exact(d.ring_frequency_hz) + "\n";
    out += "ring_damping = " + format_exact(d.ring_damping) + "\n";
    out += "hysteresis_offset = " + format_exact(d.hysteresis_offset) + "\n";
    out += "quantization_step = " + format_exact(d.quantization_step) + "\n";
    out += "noise_sigma = " + format_exact(d.noise_sigma) + "\n";
    out += "nonlinearity_coeff = " + format_exact(d.nonlinearity_coeff) + "\n";
    out += "spread.axis_gain = " + format_exact(s.axis_gain) + "\n";
    out += "spread.lag_time_constant = " + format_exact(s.lag_time_constant) + "\n";
    out += "spread.ring_frequency = " + format_exact(s.ring_frequency) + "\n";
    out += "spread.ring_damping = " + format_exact(s.ring_damping) + "\n";
    out += "spread.hysteresis_offset = " + format_exact(s.hysteresis_offset) + "\n";
    out += "spread.quantization_step = " + format_exact(s.quantization_step) + "\n";
    out += "spread.noise_sigma = " + format_exact(s.noise_sigma) + "\n";
    out += "spread.nonlinearity_coeff = " + format_exact(s.nonlinearity_coeff) + "\n";
  }
  return out;
}

double step_response(const DeviceSignature& sig, double tau_ms) {
  if (tau_ms < 0) return 0.0;
  const double rise = 1.0 - std::exp(-tau_ms / sig.lag_time_constant_ms);
  const double w = 2.0 * std::numbers::pi * sig.ring_frequency_hz / 1000.0;
  const double ring = kRingAmplitude * std::exp(-sig.ring_damping * w * tau_ms) * std::sin(w * tau_ms);
  return rise * (1.0 + ring);
}

Trace simulate_session(const DeviceSignature& sig, const PulseSchedule& schedule,
                       const WaveformSpec& spec, const SessionOptions& options,
                       std::uint64_t rng_seed) {
  validate_signature(sig);
  if (!(options.sample_rate_hz > 0)) invalid("sample rate must be > 0");
  if (schedule.onsets_ms.empty()) invalid("pulse schedule is empty");
  if (!(options.lead_in_ms >= 0) || !(options.latency_jitter_ms >= 0) || !(options.pulse_jitter_ms >= 0)) {
    invalid("lead-in and latency jitter must be >= 0");
  }

  const double dt = 1000.0 / options.sample_rate_hz;
  const double t0 = -options.lead_in_ms;
  const auto n = static_cast<std::size_t>(
      std::ceil((schedule.total_duration_ms - t0) / dt - 1e-9));

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> latency(0.0, options.latency_jitter_ms);
  std::uniform_real_distribution<double> pulse_jitter(0.0, options.pulse_jitter_ms);
  std::normal_distribution<double> noise(0.0, 1.0);

  // Noise-free normalized response, superposed pulse by pulse.
  std::vector<double> response(n, 0.0);
  const double horizon = settle_horizon_ms(sig);
  const int per_burst = std::max(1, schedule.pulses_per_burst);
  double burst_delay = 0.0;
  for (std::size_t p = 0; p < schedule.onsets_ms.size(); ++p) {
    if (p % per_burst == 0) burst_delay = options.latency_jitter_ms > 0 ? latency(rng) : 0.0;
    const double on =
        schedule.onsets_ms[p] + burst_delay + (options.pulse_jitter_ms > 0 ? pulse_jitter(rng) : 0.0);
    const double off = on + schedule.pulse_width_ms;
    auto first = static_cast<std::ptrdiff_t>(std::ceil((on - t0) / dt - 1e-9));
    double last_t = off + horizon;
    auto last = std::isinf(last_t) ? static_cast<std::ptrdiff_t>(n)
                                   : static_cast<std::ptrdiff_t>(std::ceil((last_t - t0) / dt));
    first = std::max<std::ptrdiff_t>(first, 0);
    last = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(n));
    for (std::ptrdiff_t i = first; i < last; ++i) {
      const double t = t0 + static_cast<double>(i) * dt;
      response[static_cast<std::size_t>(i)] +=
          spec.amplitude * (step_response(sig, t - on) - step_response(sig, t - off));
    }
  }

  Trace trace;
  trace.device_id = sig.device_id;
  trace.session_id = options.session_id;
  trace.sample_rate_hz = options.sample_rate_hz;
  trace.samples.resize(n);
  const double offset_per_axis = sig.hysteresis_offset / std::sqrt(3.0);
  const double q = sig.quantization_step;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = response[i];
    const double shaped = options.field_scale_ut * (r + sig.nonlinearity_coeff * r * r * r);
    double axis[3];
    for (int a = 0; a < 3; ++a) {
      double b = sig.axis_gain[a] * shaped + offset_per_axis;
      if (sig.noise_sigma > 0) b += sig.noise_sigma * noise(rng);
      axis[a] = std::round(b / q) * q;
    }
    trace.samples[i] = {t0 + static_cast<double>(i) * dt, axis[0], axis[1], axis[2]};
  }
  return trace;
}

std::vector<double> add_awgn(std::span<const double> samples, double snr_db, std::uint64_t rng_seed) {
  std::vector<double> out(samples.begin(), samples.end());
  if (std::isinf(snr_db) && snr_db > 0) return out;
  if (samples.empty()) throw Error(Errc::ZeroSignalPower, std::string(kModule), "empty input");
  double power = 0.0;
  for (double v : samples) power += v * v;
  power /= static_cast<double>(samples.size());
  if (!(power > 0)) throw Error(Errc::ZeroSignalPower, std::string(kModule), "input has zero power");
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out) v += noise(rng);
  return out;
}

}  // namespace magprint
