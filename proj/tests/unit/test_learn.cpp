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
#include <filesystem>
#include <random>

#include "../support/helpers.hpp"
#include "../support/oracles.hpp"
#include "magprint/model_io.hpp"
#include "magprint/multiclass.hpp"
#include "magprint/selection.hpp"
#include "magprint/svm.hpp"

using namespace magprint;

namespace {

Matrix rows_of(const std::vector<std::vector<double>>& v) {
  Matrix m;
  for (const auto& r : v) m.append_row(r);
  return m;
}

struct Instance {
  Matrix x;
  std::vector<int> y;
  double gamma;
  double c;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(4, 30), d_dist(1, 5);
  std::uniform_real_distribution<double> u(-1, 1), lg(-2, 1), lc(-1, 2);
  Instance in;
  const int n = n_dist(rng), d = d_dist(rng);
  in.x = Matrix(n, d);
  for (int i = 0; i < n; ++i) {
    in.y.push_back(i % 2 == 0 ? 1 : -1);
    for (int j = 0; j < d; ++j) in.x(i, j) = u(rng) + 0.4 * in.y.back() * (j == 0);
  }
  in.gamma = std::pow(10.0, lg(rng));
  in.c = std::pow(10.0, lc(rng));
  return in;
}

std::vector<std::vector<double>> to_nested(const Matrix& k) {
  std::vector<std::vector<double>> out(k.rows(), std::vector<double>(k.cols()));
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) out[i][j] = k(i, j);
  return out;
}

// KKT conditions of the soft-margin dual, checked from scratch.
bool kkt_holds(const Matrix& K, const std::vector<int>& y, const DualSolution& s, double C, double tol) {
  double balance = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double a = s.alpha[i];
    if (a < -1e-12 || a > C + 1e-12) return false;
    balance += a * y[i];
    double f = s.bias;
    for (std::size_t j = 0; j < y.size(); ++j) f += s.alpha[j] * y[j] * K(i, j);
    const double m = y[i] * f;
    if (a < 1e-12 * C && m < 1 - tol) return false;
    if (a > C * (1 - 1e-12) && m > 1 + tol) return false;
    if (a >= 1e-12 * C && a <= C * (1 - 1e-12) && std::abs(m - 1) > tol) return false;
  }
  return std::abs(balance) < 1e-9 * std::max(1.0, C);
}

double oracle_exp(std::span<const double> a, std::span<const double> b, double gamma) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d);
}

}  // namespace

TEST_SUITE("learn") {
  TEST_CASE("RBF kernel") {
    const std::vector<double> x{1, 2, 3}, y{1, 2, 4};
    CHECK(rbf_kernel(x, x, 0.7) == 1.0);
    CHECK(rbf_kernel(x, y, 1.0) == doctest::Approx(std::exp(-1.0)));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> a(4), b(4);
      for (auto& v : a) v = u(rng);
      for (auto& v : b) v = u(rng);
      CHECK(rbf_kernel(a, b, 0.3) == rbf_kernel(b, a, 0.3));
    }
    CHECK_THROWS_AS(rbf_kernel(x, std::vector<double>{1}, 1.0), Error);
    CHECK_THROWS_AS(validate_hyper({0.0, 1.0}), Error);
    CHECK_THROWS_AS(validate_hyper({1.0, -1.0}), Error);
  }

  TEST_CASE("two separable points") {
    const auto x = rows_of({{0, 0}, {1, 1}});
    const std::vector<int> y{1, -1};
    const auto m = train_binary_svm(x, y, {0.5, 1e6});
    const double f0 = decision_value(m, x.row(0)), f1 = decision_value(m, x.row(1));
    CHECK(f0 > 0);
    CHECK(f1 < 0);
    const std::vector<double> mid{0.5, 0.5};
    CHECK(std::abs(decision_value(m, mid)) < 1e-9);
    CHECK_THROWS_AS(decision_value(m, std::vector<double>{1}), Error);
  }

  TEST_CASE("XOR") {
    const auto x = rows_of({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
    const std::vector<int> y{1, 1, -1, -1};
    const auto m = train_binary_svm(x, y, {10.0, 1e6});
    for (std::size_t i = 0; i < 4; ++i) CHECK(decision_value(m, x.row(i)) * y[i] > 0);
    const auto K = rbf_gram(x, 10.0);
    const auto s = solve_svm_dual(K, y, 1e6);
    CHECK(kkt_holds(K, y, s, 1e6, 1e-3));
  }

  TEST_CASE("dual against the QP oracle") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
      const auto in = random_instance(rng);
      const auto K = rbf_gram(in.x, in.gamma);
      const auto s = solve_svm_dual(K, in.y, in.c);
      CHECK(s.converged);
      const double got = dual_objective(K, in.y, s.alpha);
      const double want = oracle::qp_dual_optimum(to_nested(K), in.y, in.c, 5000);
      CHECK(got >= want * (1 - 1e-4) - 1e-9);
      CHECK(kkt_holds(K, in.y, s, in.c, 1e-3));
    }
  }

  TEST_CASE("margin support vectors") {
    std::mt19937_64 rng(3);
    const auto in = random_instance(rng);
    const auto m = train_binary_svm(in.x, in.y, {in.gamma, in.c});
    for (std::size_t i = 0; i < m.support_vectors.rows(); ++i) {
      const double a = std::abs(m.dual_coeffs[i]);
      if (a > 1e-9 && a < in.c * (1 - 1e-9)) {
        CHECK(std::abs(std::abs(decision_value(m, m.support_vectors.row(i))) - 1) < 1e-3);
      }
      double f = m.bias;
      const auto sv = m.support_vectors.row(i);
      for (std::size_t j = 0; j < m.support_vectors.rows(); ++j) {
        f += m.dual_coeffs[j] * oracle_exp(sv, m.support_vectors.row(j), in.gamma);
      }
      CHECK(decision_value(m, sv) == doctest::Approx(f).epsilon(1e-12));
    }
  }

  TEST_CASE("binary SVM errors and determinism") {
    const auto x = rows_of({{0}, {1}, {2}});
    CHECK_THROWS_AS(train_binary_svm(x, std::vector<int>{1, 1, 1}, {}), Error);
    CHECK_THROWS_AS(train_binary_svm(x, std::vector<int>{1, 0, -1}, {}), Error);
    const auto a = train_binary_svm(rows_of({{0}, {1}, {2}, {3}}), std::vector<int>{1, -1, 1, -1}, {});
    const auto b = train_binary_svm(rows_of({{3}, {2}, {1}, {0}}), std::vector<int>{-1, 1, -1, 1}, {});
    CHECK(a.bias == b.bias);
    CHECK(a.dual_coeffs == b.dual_coeffs);
  }

  TEST_CASE("iteration budget exhaustion warns") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    Matrix x(60, 2);
    std::vector<int> y;
    for (std::size_t i = 0; i < 60; ++i) {
      x(i, 0) = n(rng);
      x(i, 1) = n(rng);
      y.push_back(i % 2 ? 1 : -1);
    }
    Warnings w;
    SmoOptions tight;
    tight.tol = 1e-12;
    tight.max_passes = 0;
    const auto m = train_binary_svm(x, y, {4.0, 1e5}, tight, &w);
    if (!m.converged) {
      REQUIRE(w.size() == 1);
      CHECK(w[0].rfind("NonConvergence", 0) == 0);
    }
    CHECK(m.support_vectors.rows() > 0);
  }

  TEST_CASE("OAO structure") {
    std::vector<std::string> classes;
    for (int c = 0; c < 9; ++c) classes.push_back("c" + std::to_string(c));
    const auto fm = testutil::planted_matrix(classes, 12, {1, 2, 3}, 6.0, 5);
    const auto x = fm.project(FeatureMask{1, 2, 3});
    const auto oao = train_oao(x, fm.labels(), {});
    CHECK(oao.machines.size() == 36);
    CHECK(oao.machine_index(0, 1) == 0);
    CHECK(oao.machine_index(7, 8) == 35);
    CHECK(oao.machines[oao.machine_index(2, 5)].positive_label == "c2");

    const auto two = testutil::planted_matrix({"a", "b"}, 15, {1}, 4.0, 6);
    const auto x2 = two.project(FeatureMask{1});
    const auto o2 = train_oao(x2, two.labels(), {});
    REQUIRE(o2.machines.size() == 1);
    std::vector<int> y;
    for (const auto& l : two.labels()) y.push_back(l == "a" ? 1 : -1);
    const auto bin = train_binary_svm(x2, y, {});
    for (std::size_t r = 0; r < x2.rows(); ++r) {
      const double f = decision_value(bin, x2.row(r));
      CHECK(decision_value(o2.machines[0], x2.row(r)) == doctest::Approx(f));
      CHECK(predict_oao(o2, x2.row(r)).label == (f >= 0 ? "a" : "b"));
    }
  }

  TEST_CASE("separable three-class OAO") {
    const auto fm = testutil::planted_matrix({"x", "y", "z"}, 20, {1, 2}, 12.0, 7);
    const auto x = fm.project(FeatureMask{1, 2});
    const auto labels = fm.labels();
    const auto oao = train_oao(x, labels, {0.5, 100.0});
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto p = predict_oao(oao, x.row(r));
      CHECK(p.label == labels[r]);
      CHECK(p.votes[oao.class_labels[0] == labels[r] ? 0 : oao.class_labels[1] == labels[r] ? 1 : 2] == 2);
    }
  }

  TEST_CASE("OAO tie break") {
    // three classes on a circle; the centre gets one vote each
    std::vector<std::vector<double>> pts;
    std::vector<std::string> labels;
    for (int c = 0; c < 3; ++c) {
      const double a = 2 * 3.141592653589793 * c / 3;
      pts.push_back({std::cos(a), std::sin(a)});
      labels.push_back(std::string(1, char('p' + c)));
    }
    const auto oao = train_oao(rows_of(pts), labels, {1.0, 10.0});
    const std::vector<double> probe{0.05, 0.02};
    const auto p1 = predict_oao(oao, probe);
    const auto p2 = predict_oao(oao, probe);
    CHECK(p1.label == p2.label);
    CHECK(p1.votes == p2.votes);
    if (p1.votes == std::vector<int>{1, 1, 1}) {
      const auto best = std::max_element(p1.decision_mass.begin(), p1.decision_mass.end()) - p1.decision_mass.begin();
      CHECK(p1.label == oao.class_labels[best]);
    }
  }

  TEST_CASE("KNN") {
    const auto train = rows_of({{0, 0}, {2, 0}, {5, 5}});
    const std::vector<std::string> labels{"left", "right", "far"};
    CHECK(knn_classify(train, labels, std::vector<double>{5, 5}) == "far");
    CHECK(knn_classify(train, labels, std::vector<double>{1, 0}) == "left");
    CHECK_THROWS_AS(knn_classify(Matrix(), {}, std::vector<double>{1}), Error);
    CHECK_THROWS_AS(knn_classify(train, labels, std::vector<double>{1}), Error);
    CHECK_THROWS_AS(knn_classify(train, labels, std::vector<double>{1, 1}, 4), Error);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 30; ++t) {
      std::vector<std::vector<double>> rows(25, std::vector<double>(3));
      std::vector<std::string> lab;
      for (auto& r : rows) {
        for (auto& v : r) v = u(rng);
        lab.push_back(std::string(1, char('a' + static_cast<int>(u(rng) * 4))));
      }
      const std::vector<double> x{u(rng), u(rng), u(rng)};
      for (std::size_t k : {1u, 3u, 5u}) CHECK(knn_classify(rows_of(rows), lab, x, k) == oracle::knn(rows, lab, x, k));
    }
  }

  TEST_CASE("subset counts") {
    CHECK(binomial(18, 6) == 18564);
    CHECK(binomial(4, 2) == 6);
    const auto fm = testutil::planted_matrix({"a", "b"}, 12, {2, 3}, 5.0, 9);
    const CvWorkspace cv(fm, kfold_split(fm, 3, 1));
    const auto r = brute_force_select(cv, {}, 2, FeatureMask{1, 2, 3, 4});
    CHECK(r.search_log.size() == 6);
    CHECK(std::find(r.tied.begin(), r.tied.end(), FeatureMask{2, 3}) != r.tied.end());
    CHECK(r.chosen == r.tied.front());
    CHECK(r.search_log.front().subset == FeatureMask{1, 2});
    CHECK(r.search_log.back().subset == FeatureMask{3, 4});
  }

  TEST_CASE("SFS") {
    const auto fm = testutil::planted_matrix({"a", "b", "c"}, 15, {5, 11}, 3.0, 10);
    const CvWorkspace cv(fm, kfold_split(fm, 3, 2));
    const auto full = sfs_select(cv, {}, FeatureMask::all());
    CHECK(full.search_log.size() == 1);
    CHECK(full.chosen == FeatureMask::all());

    const auto r = sfs_select(cv, {}, FeatureMask{});
    CHECK(r.chosen.contains(FeatureMask{5, 11}));
    for (std::size_t i = 1; i < r.search_log.size(); ++i) {
      CHECK(r.search_log[i].metric > r.search_log[i - 1].metric);
      CHECK(r.search_log[i].subset.size() == r.search_log[i - 1].subset.size() + 1);
    }
    CHECK(r.metric_value == r.search_log.back().metric);
  }

  TEST_CASE("grid search shape and tie break") {
    const auto fm = testutil::planted_matrix({"a", "b"}, 10, {1}, 10.0, 11);
    const CvWorkspace cv(fm, kfold_split(fm, 2, 3));
    CHECK(default_gamma_grid().size() == 17);
    CHECK(default_c_grid().size() == 37);
    CHECK(default_c_grid().back() == std::ldexp(1.0, 28));
    const auto one = grid_search(cv, FeatureMask{1}, {0.5}, {2.0});
    CHECK(one.best == SvmHyperParams{0.5, 2.0});
    REQUIRE(one.surface.size() == 1);
    const auto g = grid_search(cv, FeatureMask{1}, power_grid(-2, 2), power_grid(-2, 3));
    CHECK(g.surface.size() == 30);
    CHECK(g.best_accuracy == 1.0);
    // smallest C reaching the best accuracy, then smallest gamma
    double min_c = INFINITY;
    for (const auto& cell : g.surface)
      if (cell.accuracy == g.best_accuracy) min_c = std::min(min_c, cell.box_constraint);
    CHECK(g.best.box_constraint == min_c);
    CHECK(g.fold_optima.size() == 2);
  }

  TEST_CASE("model persistence") {
    std::vector<std::string> classes{"k1", "k2", "k3"};
    const auto fm = testutil::planted_matrix(classes, 15, {1, 4}, 3.0, 12);
    const auto clf = train_classifier(fm, FeatureMask{1, 2, 4}, {0.25, 8.0});
    const auto path = std::filesystem::temp_directory_path() / "magprint_model_test.txt";
    save_model(clf, path);
    const auto back = load_model(path);
    std::mt19937_64 rng(13);
    std::normal_distribution<double> n(0, 2);
    for (int t = 0; t < 100; ++t) {
      std::array<double, kFeatureCount> x{};
      for (auto& v : x) v = n(rng);
      const auto a = clf.predict(x), b = back.predict(x);
      CHECK(a.label == b.label);
      CHECK(a.votes == b.votes);
      CHECK(a.decision_mass == b.decision_mass);
    }
    const auto text = format_model(clf);
    auto code = [](std::string_view t) {
      try {
        parse_model(t);
      } catch (const Error& e) {
        return e.code();
      }
      return Errc::UsageError;
    };
    CHECK(code("") == Errc::CorruptModel);
    std::string v9 = text;
    v9.replace(v9.find("v1"), 2, "v9");
    CHECK(code(v9) == Errc::FormatVersionMismatch);
    std::string flipped = text;
    flipped[flipped.find("bias") + 6] ^= 1;
    CHECK(code(flipped) == Errc::CorruptModel);
    CHECK(code(text.substr(0, text.size() / 2)) == Errc::CorruptModel);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  }
}
