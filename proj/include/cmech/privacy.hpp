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

// Laplace sampling, the Laplace and exponential mechanisms, and a
// sequential-composition budget ledger.
//
// The Laplace sampler uses inverse-CDF on a 53-bit uniform. It is not
// hardened against floating-point side channels (no snapping).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cmech/errors.hpp"
#include "cmech/numerics.hpp"
#include "cmech/random.hpp"

namespace cmech {

struct PrivacyParams {
  double epsilon = 1.0;
  // Share of epsilon spent on private sparsity selection.
  double select_fraction = 0.1;
  // Chebyshev confidence for the noise radius.
  double delta_conf = 0.01;
  double c = 4.0;   // measurement oversampling
  double c2 = 1.0;  // tail term of the sparsity utility
  double c3 = 4.0;  // noise term of the recovery bound (diagnostics only)
  double c4 = 1.0;  // measurement term of the sparsity utility
  double c5 = 1.0;  // utility sensitivity numerator, Delta_u(S) = c5/sqrt(S)
  // Test hook: when false every Laplace scale is forced to zero.
  bool noise = true;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("epsilon must be positive and finite");
    }
    if (!(select_fraction >= 0.0 && select_fraction < 1.0)) {
      throw std::invalid_argument("select_fraction must lie in [0, 1)");
    }
    if (!(delta_conf > 0.0 && delta_conf < 1.0)) {
      throw std::invalid_argument("delta_conf must lie in (0, 1)");
    }
    for (double v : {c, c2, c3, c4, c5}) {
      if (!(v > 0.0)) {
        throw std::invalid_argument("constants C, C2..C5 must be positive");
      }
    }
  }
};

class BudgetLedger {
 public:
  struct Entry {
    std::string label;
    double amount;
  };

  explicit BudgetLedger(double total) : total_(total) {
    if (!(total > 0.0)) {
      throw std::invalid_argument("BudgetLedger: total must be positive");
    }
  }

  void spend(std::string label, double amount) {
    if (amount < 0.0) {
      throw std::invalid_argument("BudgetLedger: negative spend");
    }
    // Relative slack absorbs rounding in fraction splits such as 0.1 + 0.9.
    if (spent_ + amount > total_ * (1.0 + 1e-12)) {
      throw BudgetExceeded("privacy budget exceeded: spending " +
                           std::to_string(amount) + " for '" + label +
                           "' with " + std::to_string(remaining()) +
                           " remaining of " + std::to_string(total_));
    }
    spent_ += amount;
    entries_.push_back({std::move(label), amount});
  }

  double total() const { return total_; }
  double spent() const { return spent_; }
  double remaining() const { return std::max(total_ - spent_, 0.0); }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  double total_;
  double spent_ = 0.0;
  std::vector<Entry> entries_;
};

struct BudgetSplit {
  double select = 0.0;
  double release = 0.0;
};

inline BudgetSplit budget_split(const PrivacyParams& params) {
  params.validate();
  return {params.select_fraction * params.epsilon,
          (1.0 - params.select_fraction) * params.epsilon};
}

// One draw from Lap(scale). scale == 0 returns 0 without consuming the rng.
inline double laplace(double scale, Rng& rng) {
  if (scale < 0.0 || std::isnan(scale)) {
    throw std::invalid_argument("laplace: scale must be >= 0");
  }
  if (scale == 0.0) return 0.0;
  const double u = uniform_open01(rng) - 0.5;
  const double sign = u < 0.0 ? -1.0 : 1.0;
  return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

// v + Lap(sensitivity / epsilon) per coordinate.
inline Vector laplacian_mechanism(std::span<const double> v, double sensitivity,
                                  double epsilon, Rng& rng, bool noise = true) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("laplacian_mechanism: epsilon must be > 0");
  }
  if (sensitivity < 0.0) {
    throw std::invalid_argument(
        "laplacian_mechanism: sensitivity must be >= 0");
  }
  const double scale = noise ? sensitivity / epsilon : 0.0;
  Vector out(v.begin(), v.end());
  for (double& x : out) x += laplace(scale, rng);
  return out;
}

// Normalized selection probabilities of the exponential mechanism:
//   P(c) ∝ exp(-epsilon * utility(c) / (2 * sensitivity(c))).
// Lower utility is better. Computed with a max shift in log space.
inline std::vector<double> exponential_mechanism_probabilities(
    std::span<const double> utilities, std::span<const double> sensitivities,
    double epsilon) {
  if (utilities.empty()) {
    throw std::invalid_argument("exponential_mechanism: no candidates");
  }
  if (utilities.size() != sensitivities.size()) {
    throw std::invalid_argument(
        "exponential_mechanism: utility/sensitivity length mismatch");
  }
  if (epsilon < 0.0) {
    throw std::invalid_argument("exponential_mechanism: epsilon must be >= 0");
  }
  std::vector<double> logw(utilities.size());
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    if (!std::isfinite(utilities[i])) {
      throw std::invalid_argument("exponential_mechanism: non-finite utility");
    }
    if (!(sensitivities[i] > 0.0)) {
      throw std::invalid_argument(
          "exponential_mechanism: sensitivity must be > 0");
    }
    logw[i] = epsilon == 0.0
                  ? 0.0
                  : -epsilon * utilities[i] / (2.0 * sensitivities[i]);
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& w : logw) {
    w = std::exp(w - top);
    total += w;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw InternalError("exponential_mechanism: weights degenerate");
  }
  for (double& w : logw) w /= total;
  return logw;
}

// Samples an index into candidates.
inline std::size_t exponential_mechanism_index(
    std::span<const double> utilities, std::span<const double> sensitivities,
    double epsilon, Rng& rng) {
  const std::vector<double> p =
      exponential_mechanism_probabilities(utilities, sensitivities, epsilon);
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  // Rounding left acc slightly below 1; fall back to the last positive weight.
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) return i;
  }
  throw InternalError("exponential_mechanism: no positive weight");
}

template <typename T, typename UtilityFn, typename SensitivityFn>
const T& exponential_mechanism(const std::vector<T>& candidates,
                               UtilityFn&& utility, SensitivityFn&& sensitivity,
                               double epsilon, Rng& rng) {
  if (candidates.empty()) {
    throw std::invalid_argument("exponential_mechanism: no candidates");
  }
  std::vector<double> u(candidates.size());
  std::vector<double> s(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    u[i] = std::invoke(utility, candidates[i]);
    s[i] = std::invoke(sensitivity, candidates[i]);
  }
  return candidates[exponential_mechanism_index(u, s, epsilon, rng)];
}

}  // namespace cmech
