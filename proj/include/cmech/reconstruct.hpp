// Copyright 2026 The cmech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Sparse recovery of x from y* = A x + e with CoSaMP, halted once the
// residual falls inside the noise radius theta.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmech/errors.hpp"
#include "cmech/numerics.hpp"

namespace cmech {

// 1 - delta Chebyshev bound on ||e||_2 for k i.i.d. Lap(sqrt(k)/epsilon):
//   theta = sqrt(2 lambda^2 (k + sqrt(2k/delta))).
inline double noise_radius(std::size_t k, double epsilon, double delta) {
  if (k == 0) throw std::invalid_argument("noise_radius: k must be >= 1");
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("noise_radius: epsilon must be > 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("noise_radius: delta must lie in (0, 1)");
  }
  const double kd = static_cast<double>(k);
  const double lambda = std::sqrt(kd) / epsilon;
  return std::sqrt(2.0 * lambda * lambda * (kd + std::sqrt(2.0 * kd / delta)));
}

// Chebyshev bound on ||e||_2 when each of the k coordinates is an independent
// sum of `terms` i.i.d. Lap(scale) draws (the tree counter's output noise).
// With s = sum of m Laplace draws: E s^2 = 2 m b^2 and
// Var s^2 = (8 m^2 + 12 m) b^4, so
//   theta^2 = 2 k m b^2 + b^2 sqrt(k (8 m^2 + 12 m) / delta).
inline double summed_laplace_radius(std::size_t k, std::size_t terms,
                                    double scale, double delta) {
  if (k == 0 || terms == 0) {
    throw std::invalid_argument("summed_laplace_radius: k, terms must be >= 1");
  }
  if (scale < 0.0) {
    throw std::invalid_argument("summed_laplace_radius: scale must be >= 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument(
        "summed_laplace_radius: delta must lie in (0, 1)");
  }
  const double kd = static_cast<double>(k);
  const double m = static_cast<double>(terms);
  const double b2 = scale * scale;
  return std::sqrt(2.0 * kd * m * b2 +
                   b2 * std::sqrt(kd * (8.0 * m * m + 12.0 * m) / delta));
}

// c2 * ||x - x_S||_1 / sqrt(S) + c3 * theta.
inline double recovery_error_bound(std::span<const double> x,
                                   std::size_t sparsity, double theta,
                                   double c2, double c3) {
  const Vector head = hard_threshold_top_s(x, sparsity);
  double tail = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) tail += std::abs(x[i] - head[i]);
  return c2 * tail / std::sqrt(static_cast<double>(sparsity)) + c3 * theta;
}

enum class HaltReason { kResidual, kMaxIter, kStagnation };

inline const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::kResidual:
      return "residual";
    case HaltReason::kMaxIter:
      return "max_iter";
    case HaltReason::kStagnation:
      return "stagnation";
  }
  return "unknown";
}

struct RecoveryProblem {
  const DenseMatrix& a;
  std::span<const double> y_star;
  std::size_t sparsity = 1;
  double theta = 0.0;
  std::size_t max_iter = 0;  // 0 selects 10 * sparsity
  // Identification picks identify_factor * S proxy entries per iteration.
  std::size_t identify_factor = 2;
  double stagnation_tolerance = 1e-12;
  NumericTolerances tolerances = kDefaultTolerances;
};

struct RecoveryResult {
  Vector x_star;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  HaltReason halted_by = HaltReason::kResidual;
  // Number of restricted least-squares solves flagged rank deficient.
  std::size_t rank_warnings = 0;
};

inline RecoveryResult cosamp(const RecoveryProblem& problem) {
  const DenseMatrix& a = problem.a;
  const std::size_t n = a.cols();
  const std::size_t s = problem.sparsity;
  if (problem.y_star.size() != a.rows()) {
    throw std::invalid_argument(
        "cosamp: y* has length " + std::to_string(problem.y_star.size()) +
        ", A has " + std::to_string(a.rows()) + " rows");
  }
  if (s == 0 || s > n) {
    throw std::invalid_argument("cosamp: sparsity must lie in [1, n]");
  }
  if (!(problem.theta >= 0.0) || !std::isfinite(problem.theta)) {
    throw std::invalid_argument("cosamp: theta must be finite and >= 0");
  }
  for (double v : problem.y_star) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("cosamp: y* has a non-finite entry");
    }
  }
  const std::size_t max_iter =
      problem.max_iter == 0 ? 10 * s : problem.max_iter;
  const std::size_t identify = std::min(problem.identify_factor * s, n);

  RecoveryResult result;
  result.x_star.assign(n, 0.0);
  Vector residual(problem.y_star.begin(), problem.y_star.end());
  double res_norm = norm2(residual);
  result.final_residual = res_norm;
  if (res_norm <= problem.theta) return result;

  result.halted_by = HaltReason::kMaxIter;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const Vector proxy = multiply_transpose(a, residual);
    const SupportSet omega(top_s_indices(proxy, identify), n);
    const SupportSet merged =
        SupportSet::merge(omega, SupportSet::of(result.x_star));
    const LeastSquaresSolution ls =
        least_squares_on_support(a, problem.y_star, merged, problem.tolerances);
    if (ls.rank_deficient) ++result.rank_warnings;
    Vector candidate = hard_threshold_top_s(ls.x, s);

    Vector next_residual = multiply(a, candidate);
    for (std::size_t i = 0; i < next_residual.size(); ++i) {
      next_residual[i] = problem.y_star[i] - next_residual[i];
    }
    const double next_norm = norm2(next_residual);
    if (!std::isfinite(next_norm)) {
      throw InternalError("cosamp: non-finite residual at iteration " +
                          std::to_string(it));
    }
    result.iterations = it;

    if (next_norm >= res_norm * (1.0 - problem.stagnation_tolerance)) {
      // No progress. Keep the better iterate so the residual never grows.
      if (next_norm < res_norm) {
        result.x_star = std::move(candidate);
        res_norm = next_norm;
      }
      result.halted_by = HaltReason::kStagnation;
      break;
    }
    result.x_star = std::move(candidate);
    residual = std::move(next_residual);
    res_norm = next_norm;
    if (res_norm <= problem.theta) {
      result.halted_by = HaltReason::kResidual;
      break;
    }
  }
  result.final_residual = res_norm;
  return result;
}

}  // namespace cmech
