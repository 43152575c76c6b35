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

#include "magprint/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace magprint {

namespace {

constexpr std::string_view kModule = "learn";
constexpr double kTau = 1e-12;

struct WorkingSet {
  std::size_t i = 0;
  std::size_t j = 0;
  double gap = 0.0;
  bool found = false;
};

bool in_up(int y, double a, double c) { return y > 0 ? a < c : a > 0.0; }
bool in_low(int y, double a, double c) { return y > 0 ? a > 0.0 : a < c; }

WorkingSet select_working_set(const Matrix& k, std::span<const int> y, const std::vector<double>& alpha,
                              const std::vector<double>& grad, double c) {
  const std::size_t n = y.size();
  double gmax = -std::numeric_limits<double>::infinity();
  std::size_t i = n;
  for (std::size_t t = 0; t < n; ++t) {
    if (!in_up(y[t], alpha[t], c)) continue;
    const double m = -y[t] * grad[t];
    if (m > gmax) {
      gmax = m;
      i = t;
    }
  }
  double gmin = std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  std::size_t j = n;
  for (std::size_t t = 0; t < n; ++t) {
    if (!in_low(y[t], alpha[t], c)) continue;
    const double m = -y[t] * grad[t];
    gmin = std::min(gmin, m);
    if (i == n || m >= gmax) continue;
    const double b = gmax - m;
    double a = k(i, i) + k(t, t) - 2.0 * k(i, t);
    if (a <= 0.0) a = kTau;
    const double score = -(b * b) / a;
    if (score < best) {
      best = score;
      j = t;
    }
  }
  WorkingSet ws;
  if (i == n || j == n) return ws;
  ws.i = i;
  ws.j = j;
  ws.gap = gmax - gmin;
  ws.found = true;
  return ws;
}

double max_violation(std::span<const int> y, const std::vector<double>& alpha, const std::vector<double>& grad,
                     double c) {
  double gmax = -std::numeric_limits<double>::infinity();
  double gmin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double m = -y[t] * grad[t];
    if (in_up(y[t], alpha[t], c)) gmax = std::max(gmax, m);
    if (in_low(y[t], alpha[t], c)) gmin = std::min(gmin, m);
  }
  return gmax - gmin;
}

std::vector<double> exact_gradient(const Matrix& k, std::span<const int> y, const std::vector<double>& alpha) {
  const std::size_t n = y.size();
  std::vector<double> grad(n, -1.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (alpha[j] == 0.0) continue;
    const double aj = alpha[j] * y[j];
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * aj * k(t, j);
  }
  return grad;
}

double compute_bias(std::span<const int> y, const std::vector<double>& alpha, const std::vector<double>& grad,
                    double c) {
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double up_max = -std::numeric_limits<double>::infinity();
  double low_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double m = -y[t] * grad[t];
    if (alpha[t] > 0.0 && alpha[t] < c) {
      free_sum += m;
      ++free_count;
    }
    if (in_up(y[t], alpha[t], c)) up_max = std::max(up_max, m);
    if (in_low(y[t], alpha[t], c)) low_min = std::min(low_min, m);
  }
  if (free_count > 0) return free_sum / static_cast<double>(free_count);
  // No free vector: any value in [max over I_up, min over I_low] satisfies KKT.
  if (std::isfinite(up_max) && std::isfinite(low_min)) return 0.5 * (up_max + low_min);
  if (std::isfinite(up_max)) return up_max;
  return low_min;
}

}  // namespace

void validate_hyper(const SvmHyperParams& hyper) {
  if (!(hyper.gamma > 0.0) || !std::isfinite(hyper.gamma) || !(hyper.box_constraint > 0.0) ||
      !std::isfinite(hyper.box_constraint)) {
    throw Error(Errc::InvalidSpec, std::string(kModule), "gamma and box constraint must be positive and finite");
  }
}

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  if (x.size() != y.size()) {
    throw Error(Errc::DimensionMismatch, std::string(kModule),
                "kernel arguments have dimensions " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

Matrix rbf_gram(const Matrix& rows, double gamma) {
  const std::size_t n = rows.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rbf_kernel(rows.row(i), rows.row(j), gamma);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

DualSolution solve_svm_dual(const Matrix& k, std::span<const int> y, double c, const SmoOptions& opts) {
  const std::size_t n = y.size();
  if (k.rows() != n || k.cols() != n) {
    throw Error(Errc::DimensionMismatch, std::string(kModule), "kernel matrix does not match label count");
  }
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw Error(Errc::InvalidSpec, std::string(kModule), "labels must be +1 or -1");
  }
  if (!pos || !neg) {
    throw Error(Errc::SingleClassInput, std::string(kModule), "both classes must be present");
  }

  DualSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto& alpha = sol.alpha;
  const long budget = std::max<long>(10000, 10L * std::max(1, opts.max_passes) * static_cast<long>(n));

  for (;;) {
    WorkingSet ws = select_working_set(k, y, alpha, grad, c);
    if (!ws.found || ws.gap < opts.tol) {
      // Confirm against a freshly computed gradient before stopping.
      grad = exact_gradient(k, y, alpha);
      if (max_violation(y, alpha, grad, c) < opts.tol) break;
      ws = select_working_set(k, y, alpha, grad, c);
      if (!ws.found) break;
    }
    if (sol.iterations >= budget) {
      sol.converged = false;
      break;
    }
    ++sol.iterations;

    const std::size_t i = ws.i, j = ws.j;
    const double old_ai = alpha[i], old_aj = alpha[j];
    double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (quad <= 0.0) quad = kTau;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = (alpha[i] - old_ai) * y[i];
    const double daj = (alpha[j] - old_aj) * y[j];
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (k(t, i) * dai + k(t, j) * daj);
  }
  sol.bias = compute_bias(y, alpha, grad, c);
  return sol;
}

double dual_objective(const Matrix& k, std::span<const int> y, std::span<const double> alpha) {
  const std::size_t n = y.size();
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
  }
  return lin - 0.5 * quad;
}

SvmModel train_binary_svm(const Matrix& rows, std::span<const int> labels, const SvmHyperParams& hyper,
                          const SmoOptions& opts, Warnings* warnings) {
  validate_hyper(hyper);
  if (rows.rows() != labels.size()) {
    throw Error(Errc::DimensionMismatch, std::string(kModule),
                std::to_string(rows.rows()) + " rows but " + std::to_string(labels.size()) + " labels");
  }
  if (rows.empty()) throw Error(Errc::EmptyTrain, std::string(kModule), "no training rows");

  std::vector<std::size_t> order(rows.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = rows.row(a), rb = rows.row(b);
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return labels[a] < labels[b];
  });
  const Matrix sorted = select_rows(rows, order);
  std::vector<int> y(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) y[i] = labels[order[i]];

  const Matrix gram = rbf_gram(sorted, hyper.gamma);
  const DualSolution sol = solve_svm_dual(gram, y, hyper.box_constraint, opts);

  SvmModel model;
  model.hyper = hyper;
  model.bias = sol.bias;
  model.iterations = sol.iterations;
  model.converged = sol.converged;
  model.support_vectors = Matrix(0, rows.cols());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (sol.alpha[i] <= 0.0) continue;
    model.support_vectors.append_row(sorted.row(i));
    model.dual_coeffs.push_back(sol.alpha[i] * y[i]);
  }
  if (!sol.converged) {
    warn(warnings, "NonConvergence: SMO stopped after " + std::to_string(sol.iterations) +
                       " updates without reaching tolerance");
  }
  return model;
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dimension()) {
    throw Error(Errc::DimensionMismatch, std::string(kModule),
                "model expects " + std::to_string(model.dimension()) + " features, got " + std::to_string(x.size()));
  }
  double f = model.bias;
  for (std::size_t i = 0; i < model.dual_coeffs.size(); ++i) {
    f += model.dual_coeffs[i] * rbf_kernel(model.support_vectors.row(i), x, model.hyper.gamma);
  }
  return f;
}

}  // namespace magprint
