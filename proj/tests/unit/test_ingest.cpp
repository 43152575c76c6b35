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

#include <filesystem>
#include <functional>

#include "magprint/ingest.hpp"
#include "magprint/simulator.hpp"
#include "magprint/stimulus.hpp"
#include "magprint/text_io.hpp"

using namespace magprint;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("magprint_ingest_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::UsageError;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("sample rate from timestamps") {
    const auto t = parse_trace("t_ms,bx_ut,by_ut,bz_ut\n0,1,2,3\n50,1,2,3\n100,1,2,3\n");
    CHECK(t.sample_rate_hz == doctest::Approx(20.0));
    CHECK(t.samples.size() == 3);
  }

  TEST_CASE("trace errors") {
    CHECK(code_of([] { parse_trace("t_ms,bx_ut,by_ut,bz_ut\n0,1,2,3\n0,1,2,3\n50,1,1,1\n"); }) ==
          Errc::NonMonotonicTimestamps);
    CHECK(code_of([] { parse_trace("t_ms,bx_ut,by_ut,bz_ut\n"); }) == Errc::EmptyTrace);
    CHECK(code_of([] { parse_trace("t_ms,bx_ut,by_ut,bz_ut\n0,1,2\n"); }) == Errc::ParseError);
    CHECK(code_of([] { parse_trace("t_ms,bx_ut,by_ut,bz_ut\n0,1,2,x\n"); }) == Errc::ParseError);
    CHECK(code_of([] { parse_trace("t_ms,bx_ut,by_ut,bz_ut\n0,1,2,3\n50,1,2,3\n100,1,2,3\n300,1,2,3\n"); }) ==
          Errc::IrregularSampling);
  }

  TEST_CASE("mild jitter is a warning") {
    Warnings w;
    const auto t = parse_trace("t_ms,bx_ut,by_ut,bz_ut\n0,1,2,3\n50,1,2,3\n108,1,2,3\n150,1,2,3\n", "d", "s", &w);
    CHECK(t.samples.size() == 4);
    CHECK(!w.empty());
  }

  TEST_CASE("trace round trip") {
    const auto park = make_park(default_park_spec());
    auto spec = waveform_preset("A");
    spec.burst_repetitions = 5;
    const auto t = simulate_session(park[4], pulse_onsets(spec), spec, SessionOptions{}, 9);
    const auto back = parse_trace(format_trace(t), t.device_id, t.session_id);
    REQUIRE(back.samples.size() == t.samples.size());
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      CHECK(back.samples[i].t_ms == t.samples[i].t_ms);
      CHECK(back.samples[i].bx == doctest::Approx(t.samples[i].bx).epsilon(1e-6));
      CHECK(back.samples[i].bz == doctest::Approx(t.samples[i].bz).epsilon(1e-6));
    }
    CHECK(back.sample_rate_hz == doctest::Approx(t.sample_rate_hz));
  }

  TEST_CASE("magnitude and channels") {
    Trace t;
    t.samples = {{0, 3, 4, 0}, {50, 0, 0, 0}, {100, -3, -4, 0}};
    CHECK(magnitude(t) == std::vector<double>{5, 0, 5});
    CHECK(extract_channel(t, Channel::Y) == std::vector<double>{4, 0, -4});
    CHECK(parse_channel("z") == Channel::Z);
    CHECK(channel_name(Channel::Magnitude) == "magnitude");
    CHECK_THROWS_AS(parse_channel("w"), Error);
  }

  TEST_CASE("manifest of a multi-day park") {
    const auto dir = scratch("manifest");
    const auto park = make_park(default_park_spec());
    std::vector<SessionManifest> entries;
    for (int day = 1; day <= 3; ++day) {
      for (const auto& d : park) {
        const auto rel = "traces/" + d.device_id + "_" + std::to_string(day) + ".csv";
        write_text_file(dir / rel, "t_ms,bx_ut,by_ut,bz_ut\n0,1,2,3\n", "test");
        entries.push_back({"day" + std::to_string(day), d.device_id, "day" + std::to_string(day), "B", dir / rel});
      }
    }
    write_text_file(dir / "manifest.csv", format_manifest(entries, dir), "test");
    const auto loaded = load_manifest(dir / "manifest.csv");
    REQUIRE(loaded.size() == 27);
    CHECK(loaded[26].trace_path == entries[26].trace_path);
    CHECK(read_text_file(dir / "manifest.csv", "test").find(dir.string()) == std::string::npos);
  }

  TEST_CASE("manifest edge cases") {
    const auto dir = scratch("edge");
    Warnings w;
    CHECK(parse_manifest("", dir, &w).empty());
    CHECK(w.size() == 1);
    try {
      parse_manifest("session_id,device_id,day_label,waveform_id,trace_path\ns,d,day1,B,missing.csv\n", dir);
      FAIL("missing file accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MissingTraceFile);
      CHECK(std::string(e.what()).find("missing.csv") != std::string::npos);
    }
    CHECK(code_of([&] { parse_manifest("a,b\n", dir); }) == Errc::ParseError);
  }
}
