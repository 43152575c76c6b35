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

#include <cmath>
#include <random>

#include "../support/helpers.hpp"
#include "../support/oracles.hpp"
#include "magprint/features.hpp"

using namespace magprint;

namespace {

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("all-ones segment") {
    const std::vector<double> ones(8, 1.0);
    const auto b = statistical_block(ones);
    CHECK(b.values[0] == 0.0);
    CHECK(b.values[1] == 0.0);
    CHECK(b.values[3] == 0.0);
    CHECK(b.degenerate);
    try {
      time_features(ones);
      FAIL("degenerate segment accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DegenerateSegment);
    }
    CHECK_THROWS_AS(time_features(std::vector<double>{1.0}), Error);
  }

  TEST_CASE("[1 2 3]") {
    const auto b = statistical_block(std::vector<double>{1, 2, 3});
    CHECK(b.values[3] == doctest::Approx(1.0));
    CHECK(b.values[2] == doctest::Approx(1.0));
    // sum(s^3) - n mu^3 = 36 - 24
    CHECK(b.values[4] == doctest::Approx(12.0));
    CHECK(b.values[5] == doctest::Approx(98.0 - 48.0));
    FeatureOptions classical;
    classical.classical_moments = true;
    const auto c = statistical_block(std::vector<double>{1, 2, 3}, classical);
    CHECK(c.values[4] == doctest::Approx(0.0));
    CHECK(c.values[5] == doctest::Approx(1.5));
  }

  TEST_CASE("DFT of a delta and a constant") {
    const auto d = dft(std::vector<double>{1, 0, 0, 0});
    for (const auto& x : d) {
      CHECK(x.real() == doctest::Approx(1.0));
      CHECK(x.imag() == doctest::Approx(0.0));
    }
    const auto c = dft(std::vector<double>(5, 2.0));
    CHECK(c[0].real() == doctest::Approx(10.0));
    for (std::size_t k = 1; k < 5; ++k) CHECK(std::abs(c[k]) < 1e-12);
  }

  TEST_CASE("DFT against direct sum") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t n = 2; n <= 64; ++n) {
      std::vector<double> s(n);
      for (auto& v : s) v = u(rng);
      const auto got = dft(s);
      const auto want = oracle::direct_dft(s);
      double worst = 0;
      for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
      CHECK(worst < 1e-9);
    }
  }

  TEST_CASE("constant segment spectrum") {
    const std::vector<double> s(6, -1.5);
    const auto p = polar_spectrum(s);
    CHECK(p.amplitude[0] == doctest::Approx(9.0));
    for (std::size_t k = 1; k < 6; ++k) {
      CHECK(p.amplitude[k] == 0.0);
      CHECK(p.phase[k] == 0.0);
    }
    CHECK(p.phase[0] == doctest::Approx(3.141592653589793));
    const auto amp = statistical_block(p.amplitude);
    CHECK(!amp.degenerate);
    CHECK(amp.values[3] == doctest::Approx(81.0 / 6.0));
    CHECK_THROWS_AS(spectral_features(std::vector<double>(6, 1.0)), Error);
  }

  TEST_CASE("delta segment phase block") {
    const auto p = polar_spectrum(std::vector<double>{1, 0, 0, 0});
    CHECK(p.phase == std::vector<double>(4, 0.0));
    const auto b = statistical_block(p.phase);
    CHECK(b.values[0] == 0.0);
    CHECK(b.values[3] == 0.0);
    // log energy of an all-zero block is N ln(floor)
    CHECK(b.values[1] == doctest::Approx(4 * std::log(kDefaultLogFloor)));
    CHECK(b.degenerate);
    try {
      spectral_features(std::vector<double>{1, 0, 0, 0});
      FAIL("degenerate phase accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DegenerateSegment);
      CHECK(std::string(e.what()).find("phase") != std::string::npos);
    }
  }

  TEST_CASE("phase range") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 50; ++t) {
      const auto s = testutil::random_normalized(rng, 9 + t % 7);
      for (double ph : polar_spectrum(s).phase) {
        CHECK(ph > -3.141592653589793);
        CHECK(ph <= 3.141592653589793);
      }
    }
  }

  TEST_CASE("18 features against the scalar oracle") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
      const auto s = testutil::random_normalized(rng, 20 + t % 50);
      const auto got = extract_features(s);
      const auto want = oracle::features(s);
      for (int f = 0; f < kFeatureCount; ++f) {
        INFO("feature " << f + 1 << " trial " << t);
        CHECK(close_rel(got[f], want[f], 1e-9));
      }
    }
  }

  TEST_CASE("normalized variance bound") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 100; ++t) {
      const auto s = testutil::random_normalized(rng, 10 + t);
      const double n = static_cast<double>(s.size());
      CHECK(time_features(s)[3] <= n / (n - 1) + 1e-12);
    }
  }

  TEST_CASE("feature mask") {
    const auto m = FeatureMask::parse("[1 2 3 6 7 10 15 17]");
    CHECK(m.size() == 8);
    CHECK(m.to_string() == "[1 2 3 6 7 10 15 17]");
    CHECK(FeatureMask::parse("3,1, 2") == FeatureMask{1, 2, 3});
    CHECK(m.columns()[3] == 5);
    CHECK(m.contains(FeatureMask{1, 17}));
    CHECK(!m.contains(4));
    CHECK(m.with(4).size() == 9);
    CHECK(FeatureMask::all().size() == 18);
    CHECK_THROWS_AS(FeatureMask::parse("0 1"), Error);
    CHECK_THROWS_AS(FeatureMask::parse("19"), Error);
    CHECK_THROWS_AS(FeatureMask::parse("1 x"), Error);
  }

  TEST_CASE("feature matrix assembly") {
    CHECK(build_feature_matrix({}).empty());
    std::mt19937_64 rng(9);
    std::vector<ResponseSegment> segs;
    for (int i = 0; i < 10; ++i) segs.push_back(testutil::segment_of("d" + std::to_string(i % 3), i, testutil::random_normalized(rng, 30)));
    segs[4].samples.assign(30, 1.0);
    std::vector<DroppedRow> dropped;
    const auto m = build_feature_matrix(segs, {}, &dropped);
    CHECK(m.size() == 9);
    REQUIRE(dropped.size() == 1);
    CHECK(dropped[0].segment_index == 4);
    CHECK(m.class_labels() == std::vector<std::string>{"d0", "d1", "d2"});
    CHECK(m.row_counts().at("d1") == 2);
    segs[2].samples.resize(12);
    CHECK_THROWS_AS(build_feature_matrix(segs), Error);
  }

  TEST_CASE("standardization") {
    Matrix train(5, 3);
    for (std::size_t r = 0; r < 5; ++r) {
      train(r, 0) = r * r;
      train(r, 1) = 7.0;
      train(r, 2) = -double(r);
    }
    const auto p = standardize(train, train);
    for (std::size_t c : {0u, 2u}) {
      double mean = 0, ss = 0;
      for (std::size_t r = 0; r < 5; ++r) mean += p.train(r, c) / 5;
      for (std::size_t r = 0; r < 5; ++r) ss += (p.train(r, c) - mean) * (p.train(r, c) - mean);
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::sqrt(ss / 4) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(p.stats.constant[1]);
    for (std::size_t r = 0; r < 5; ++r) CHECK(p.train(r, 1) == 0.0);

    // a skewed held-out block keeps the training statistics
    Matrix test(2, 3);
    test(0, 0) = 100;
    test(1, 0) = 101;
    const auto q = standardize(train, test);
    CHECK(q.apply_to(0, 0) == doctest::Approx((100 - 6.0) / q.stats.stddev[0]));
    CHECK(q.apply_to(0, 0) != doctest::Approx(-0.7071067811865476));
    CHECK_THROWS_AS(standardize(train, Matrix(2, 4)), Error);
  }

  TEST_CASE("feature CSV round trip") {
    std::mt19937_64 rng(10);
    std::vector<ResponseSegment> segs;
    for (int i = 0; i < 4; ++i) segs.push_back(testutil::segment_of("dev", i, testutil::random_normalized(rng, 25)));
    const auto m = build_feature_matrix(segs);
    const auto back = parse_feature_matrix(format_feature_matrix(m));
    REQUIRE(back.size() == 4);
    for (std::size_t r = 0; r < 4; ++r) {
      CHECK(back.rows[r].values == m.rows[r].values);
      CHECK(back.rows[r].segment_index == m.rows[r].segment_index);
    }
    CHECK_THROWS_AS(parse_feature_matrix("device_id,session_id\n"), Error);
  }
}
