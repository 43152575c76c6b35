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

#include <span>
#include <string>
#include <vector>

#include "magprint/error.hpp"
#include "magprint/matrix.hpp"

namespace magprint {

struct SvmHyperParams {
  double gamma = 0.125;         // RBF scaling factor
  double box_constraint = 4.0;  // C

  friend bool operator==(const SvmHyperParams&, const SvmHyperParams&) = default;
};

void validate_hyper(const SvmHyperParams& hyper);

struct SmoOptions {
  /// Stopping gap on the maximal violating pair; KKT conditions then hold to `tol`.
  double tol = 1e-3;
  /// Scales the iteration budget: max(10000, 10 * max_passes * n) pair updates.
  int max_passes = 50;
};

/// exp(-gamma * |x - y|^2)
double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

/// Dense n x n RBF Gram matrix.
Matrix rbf_gram(const Matrix& rows, double gamma);

struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  long iterations = 0;
  bool converged = true;
};

/// Solves   max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij
///          s.t. 0 <= a_i <= C,  sum(a_i y_i) = 0
/// by SMO with second-order working-set selection.
DualSolution solve_svm_dual(const Matrix& kernel, std::span<const int> y, double box_constraint,
                            const SmoOptions& opts = {});

double dual_objective(const Matrix& kernel, std::span<const int> y, std::span<const double> alpha);

struct SvmModel {
  Matrix support_vectors;
  std::vector<double> dual_coeffs;  // alpha_i * y_i
  double bias = 0.0;
  SvmHyperParams hyper;
  std::string positive_label = "+1";
  std::string negative_label = "-1";
  long iterations = 0;
  bool converged = true;

  std::size_t dimension() const noexcept { return support_vectors.cols(); }
};

/// Trains on rows with labels in {+1, -1}. Rows are put in a canonical order
/// first, so the model does not depend on the input row order. When the
/// iteration budget runs out the model is still returned, with
/// `converged == false` and a NonConvergence warning.
SvmModel train_binary_svm(const Matrix& rows, std::span<const int> labels, const SvmHyperParams& hyper,
                          const SmoOptions& opts = {}, Warnings* warnings = nullptr);

/// f(x) = sum_i alpha_i y_i K(x_i, x) + b
double decision_value(const SvmModel& model, std::span<const double> x);

}  // namespace magprint
