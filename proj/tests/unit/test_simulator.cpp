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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "magprint/ingest.hpp"
#include "magprint/simulator.hpp"
#include "magprint/stimulus.hpp"

using namespace magprint;

namespace {

DeviceSignature quiet_device() {
  DeviceSignature d;
  d.device_id = "dev";
  d.model_id = "m";
  d.noise_sigma = 0.0;
  d.quantization_step = 1e-9;
  d.hysteresis_offset = 0.0;
  d.nonlinearity_coeff = 0.0;
  return d;
}

SessionOptions exact_timing() {
  SessionOptions o;
  o.latency_jitter_ms = 0.0;
  o.pulse_jitter_ms = 0.0;
  return o;
}

WaveformSpec one_pulse() {
  WaveformSpec w;
  w.pulse_width_ms = 2000;
  w.inter_pulse_gap_ms = 3000;
  w.burst_repetitions = 1;
  return w;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("zero spread gives identical devices") {
    ParkSpec spec;
    ModelSpec m;
    m.model_id = "only";
    m.device_count = 3;
    spec.models = {m};
    const auto park = make_park(spec);
    REQUIRE(park.size() == 3);
    for (auto d : park) {
      d.device_id = park[0].device_id;
      CHECK(d == park[0]);
    }
    CHECK(park[2].device_id == "only-3");
  }

  TEST_CASE("park determinism") {
    const auto a = make_park(default_park_spec(7));
    const auto b = make_park(default_park_spec(7));
    const auto c = make_park(default_park_spec(8));
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 9);
  }

  TEST_CASE("park validation") {
    auto spec = default_park_spec();
    spec.models[0].spread.noise_sigma = -1;
    CHECK_THROWS_AS(make_park(spec), Error);
    spec = default_park_spec();
    spec.models[1].device_count = 0;
    CHECK_THROWS_AS(make_park(spec), Error);
    const auto text = format_park_spec(default_park_spec(3));
    CHECK(make_park(parse_park_spec(text)) == make_park(default_park_spec(3)));
  }

  TEST_CASE("lag response rises after the onset") {
    auto d = quiet_device();
    d.ring_frequency_hz = 0.0;
    const auto spec = one_pulse();
    const auto t = simulate_session(d, pulse_onsets(spec), spec, exact_timing(), 1);
    const auto mag = magnitude(t);
    std::size_t onset = 0;
    while (t.samples[onset].t_ms < 0) ++onset;
    for (std::size_t i = 0; i < onset; ++i) CHECK(mag[i] == doctest::Approx(0.0).epsilon(1e-9));
    // monotone first-order rise toward gain * amplitude while the pulse is on
    const double target = 25.0 * std::sqrt(3.0);
    double prev = mag[onset];
    for (std::size_t i = onset + 1; t.samples[i].t_ms < 2000; ++i) {
      CHECK(mag[i] >= prev - 1e-9);
      CHECK(mag[i] <= target + 1e-6);
      prev = mag[i];
    }
    CHECK(prev > 0.99 * target);
  }

  TEST_CASE("ringing overshoots a plain lag") {
    auto d = quiet_device();
    d.ring_frequency_hz = 2.0;
    d.ring_damping = 0.1;
    const auto spec = one_pulse();
    const auto mag = magnitude(simulate_session(d, pulse_onsets(spec), spec, exact_timing(), 1));
    CHECK(*std::max_element(mag.begin(), mag.end()) > 25.0 * std::sqrt(3.0) * 1.05);
  }

  TEST_CASE("flat stimulus leaves offset plus noise") {
    auto d = quiet_device();
    d.hysteresis_offset = 2.0;
    auto spec = one_pulse();
    spec.amplitude = 0.0;
    const auto mag = magnitude(simulate_session(d, pulse_onsets(spec), spec, exact_timing(), 1));
    for (double v : mag) CHECK(v == doctest::Approx(2.0).epsilon(1e-6));
  }

  TEST_CASE("gain ratio carries to the peak") {
    auto a = quiet_device();
    auto b = quiet_device();
    b.axis_gain = {2.0, 2.0, 2.0};
    const auto spec = one_pulse();
    const auto sched = pulse_onsets(spec);
    const auto ma = magnitude(simulate_session(a, sched, spec, exact_timing(), 3));
    const auto mb = magnitude(simulate_session(b, sched, spec, exact_timing(), 3));
    const double pa = *std::max_element(ma.begin(), ma.end());
    const double pb = *std::max_element(mb.begin(), mb.end());
    CHECK(pb / pa == doctest::Approx(2.0).epsilon(1e-6));
  }

  TEST_CASE("session determinism") {
    const auto park = make_park(default_park_spec());
    const auto spec = waveform_preset("A");
    const auto sched = pulse_onsets(spec);
    const auto t1 = simulate_session(park[0], sched, spec, SessionOptions{}, 11);
    const auto t2 = simulate_session(park[0], sched, spec, SessionOptions{}, 11);
    const auto t3 = simulate_session(park[0], sched, spec, SessionOptions{}, 12);
    CHECK(t1.samples == t2.samples);
    CHECK(t1.samples != t3.samples);
    CHECK(t1.sample_rate_hz == 20.0);
    CHECK(t1.samples[1].t_ms - t1.samples[0].t_ms == doctest::Approx(50.0));
  }

  TEST_CASE("white noise") {
    std::vector<double> x(20000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * i) + 0.5;
    CHECK(add_awgn(x, INFINITY, 1) == x);
    const auto y = add_awgn(x, 0.0, 5);
    double ps = 0, pn = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ps += x[i] * x[i];
      pn += (y[i] - x[i]) * (y[i] - x[i]);
    }
    CHECK(pn / ps == doctest::Approx(1.0).epsilon(0.05));
    const auto z = add_awgn(x, 10.0, 5);
    double pz = 0;
    for (std::size_t i = 0; i < x.size(); ++i) pz += (z[i] - x[i]) * (z[i] - x[i]);
    CHECK(pz / ps == doctest::Approx(0.1).epsilon(0.05));
    CHECK_THROWS_AS(add_awgn(std::vector<double>(10, 0.0), 10.0, 1), Error);
  }
}
