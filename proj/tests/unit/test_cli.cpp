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
#include <filesystem>
#include <sstream>

#include "magprint/cli.hpp"
#include "magprint/text_io.hpp"

using namespace magprint;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("magprint_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2 with help") {
    auto r = run({"simulate", "--bogus"});
    CHECK(r.code == 2);
    CHECK(r.err.find("code=UsageError") != std::string::npos);
    CHECK(r.err.find("--waveform") != std::string::npos);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("domain errors exit 1 with one line") {
    const auto r = run({"features", "--segments", "/nonexistent/segments.csv"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: module=", 0) == 0);
    CHECK(r.err.find("code=IoError") != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }

  TEST_CASE("simulate writes traces and a manifest") {
    const auto dir = scratch("sim");
    const auto r = run({"simulate", "--park", "default9", "--waveform", "A", "--out", dir.string()});
    REQUIRE(r.code == 0);
    std::size_t traces = 0;
    for (const auto& e : fs::directory_iterator(dir / "traces")) traces += e.path().extension() == ".csv";
    CHECK(traces == 9);
    CHECK(fs::exists(dir / "manifest.csv"));
    CHECK(split_lines(read_text_file(dir / "manifest.csv", "test")).size() >= 10);

    const auto s = run({"segment", "--manifest", (dir / "manifest.csv").string(), "--out", dir.string()});
    REQUIRE(s.code == 0);
    CHECK(s.out.find("2340 segments") != std::string::npos);
    const auto f = run({"features", "--segments", (dir / "segments_A.csv").string(), "--out", dir.string()});
    REQUIRE(f.code == 0);
    CHECK(fs::exists(dir / "features_A.csv"));
    const auto t = run({"train", "--features", (dir / "features_A.csv").string(), "--out", dir.string()});
    REQUIRE(t.code == 0);
    const auto c = run({"classify", "--features", (dir / "features_A.csv").string(), "--model",
                        (dir / "model.txt").string(), "--out", dir.string()});
    REQUIRE(c.code == 0);
    CHECK(fs::exists(dir / "confusion.csv"));
  }

  TEST_CASE("report on the reference confusion fixture") {
    const auto r = run({"report", "--confusion", std::string(MAGPRINT_FIXTURE_DIR) + "/svm_confusion.csv",
                        "--compare", std::string(MAGPRINT_FIXTURE_DIR) + "/knn_confusion.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("total 2340") != std::string::npos);
    CHECK(r.out.find("accuracy ") != std::string::npos);
    CHECK(r.out.find("diagonal ratio") != std::string::npos);
  }

  TEST_CASE("config file") {
    const auto cfg = parse_pipeline_config(
        "# run\nwaveform = C\nlearn.gamma = 0.5\nlearn.c_exponents = -2:3\neval.snr_db = inf,10\nseed = 7\n");
    CHECK(cfg.waveform == "C");
    CHECK(cfg.hyper.gamma == 0.5);
    CHECK(cfg.c_exp_lo == -2);
    CHECK(cfg.c_exp_hi == 3);
    CHECK(cfg.snr_db.size() == 2);
    CHECK(std::isinf(cfg.snr_db[0]));
    CHECK(cfg.seed == 7);
    CHECK_THROWS_AS(parse_pipeline_config("nope = 1\n"), Error);
    CHECK_THROWS_AS(parse_pipeline_config("learn.c_exponents = 3:1\n"), Error);

    PipelineConfig both;
    both.park = "default9";
    both.manifest = "x.csv";
    CHECK_THROWS_AS(validate_pipeline_config(both), Error);
    PipelineConfig none;
    CHECK_THROWS_AS(validate_pipeline_config(none, true), Error);
    PipelineConfig bad_folds;
    bad_folds.folds = 1;
    CHECK_THROWS_AS(validate_pipeline_config(bad_folds), Error);
  }

  TEST_CASE("config flag feeds subcommands") {
    const auto dir = scratch("cfg");
    fs::create_directories(dir);
    write_text_file(dir / "run.cfg", "waveform = C\nout = " + (dir / "o").string() + "\n", "test");
    const auto r = run({"export-stimulus", "--config", (dir / "run.cfg").string(), "--pcm-rate", "8000"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "o" / "stimulus_C.wav"));
    CHECK(fs::exists(dir / "o" / "schedule_C.csv"));
  }

  TEST_CASE("device groups") {
    CHECK(default_device_group("htc-1") == "htc");
    CHECK(default_device_group("samsung-s5-2") == "samsung-s5");
    CHECK(default_device_group("solo") == "solo");
  }
}
