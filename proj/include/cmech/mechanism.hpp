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

// The static compressive mechanism and the Laplace identity-query baseline.
//
// Compressive release of D in R^n:
//   1. Phi: k x padded_n symmetric Bernoulli, k from plan_measurements
//   2. y  = Phi D
//   3. y* = y + Lap(sqrt(k)/epsilon)^k        <- the only noise site
//   4. x* = CoSaMP(Phi Psi, y*, S, theta)
//   5. D* = Psi x*
// Steps 4 and 5 are deterministic functions of (y*, Phi, basis).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cmech/bases.hpp"
#include "cmech/errors.hpp"
#include "cmech/numerics.hpp"
#include "cmech/privacy.hpp"
#include "cmech/random.hpp"
#include "cmech/reconstruct.hpp"
#include "cmech/sensing.hpp"

namespace cmech {

// Key space for deriving independent streams from one release seed.
enum class SeedStream : std::uint64_t {
  kSensing = 1,
  kNoise = 2,
  kSelect = 3,
  kData = 4,
};

inline std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream) {
  return derive_seed(seed, {static_cast<std::uint64_t>(stream)});
}

enum class MechanismKind { kCompressive, kLaplace };

inline std::string_view to_string(MechanismKind m) {
  return m == MechanismKind::kCompressive ? "cm" : "lm";
}

struct ReleaseRecord {
  Vector d_star;
  MechanismKind mechanism = MechanismKind::kCompressive;
  double epsilon_spent = 0.0;
  std::size_t s_used = 0;  // compressive only
  std::size_t k_used = 0;  // compressive only
  std::uint64_t seed = 0;
  std::optional<double> l2_error;

  // Recovery diagnostics, compressive only.
  double theta = 0.0;
  std::size_t iterations = 0;
  HaltReason halted_by = HaltReason::kResidual;
};

inline double l2_error(std::span<const double> d,
                       std::span<const double> d_star) {
  if (d.size() != d_star.size()) {
    throw std::invalid_argument("l2_error: lengths " +
                                std::to_string(d.size()) + " and " +
                                std::to_string(d_star.size()) + " differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double diff = d[i] - d_star[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

// Steps 2-5 against a caller-supplied sensing matrix. The streaming
// mechanism's noise-free oracle runs through here with [Phi_1 ... Phi_t].
inline ReleaseRecord compressive_release_with(
    std::span<const double> d, const SparseBasis& basis, std::size_t sparsity,
    const SensingMatrix& phi, double epsilon, const PrivacyParams& params,
    Rng& noise_rng) {
  if (d.size() != basis.n) {
    throw std::invalid_argument("compressive_release: data length mismatch");
  }
  if (sparsity == 0 || sparsity > basis.padded_n) {
    throw std::invalid_argument(
        "compressive_release: S=" + std::to_string(sparsity) + " outside [1, " +
        std::to_string(basis.n) + "]");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("compressive_release: epsilon must be > 0");
  }
  const std::size_t k = phi.rows();
  Vector padded(basis.padded_n, 0.0);
  std::copy(d.begin(), d.end(), padded.begin());

  const Vector y = phi.apply(padded);
  const double sensitivity = std::sqrt(static_cast<double>(k));
  const Vector y_star =
      laplacian_mechanism(y, sensitivity, epsilon, noise_rng, params.noise);

  const double theta =
      params.noise ? noise_radius(k, epsilon, params.delta_conf) : 0.0;
  const DenseMatrix a = compose(phi, basis);
  const RecoveryResult rec =
      cosamp(RecoveryProblem{.a = a,
                             .y_star = y_star,
                             .sparsity = std::min(sparsity, k),
                             .theta = theta});

  ReleaseRecord out;
  out.d_star = inverse(basis, rec.x_star);
  for (double v : out.d_star) {
    if (!std::isfinite(v)) {
      throw InternalError("compressive_release: non-finite reconstruction");
    }
  }
  out.mechanism = MechanismKind::kCompressive;
  out.epsilon_spent = epsilon;
  out.s_used = sparsity;
  out.k_used = k;
  out.theta = theta;
  out.iterations = rec.iterations;
  out.halted_by = rec.halted_by;
  return out;
}

// Full compressive release with sparsity S fixed by the caller.
inline ReleaseRecord compressive_mechanism(std::span<const double> d,
                                           BasisKind basis_kind,
                                           std::size_t sparsity, double epsilon,
                                           const PrivacyParams& params,
                                           std::uint64_t seed,
                                           BudgetLedger* ledger = nullptr) {
  if (d.empty()) throw std::invalid_argument("compressive_mechanism: empty D");
  if (sparsity == 0 || sparsity > d.size()) {
    throw std::invalid_argument(
        "compressive_mechanism: S=" + std::to_string(sparsity) +
        " outside [1, " + std::to_string(d.size()) + "]");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("compressive_mechanism: epsilon must be > 0");
  }
  if (ledger != nullptr) ledger->spend("compressive release", epsilon);
  const SparseBasis basis = build_basis(basis_kind, d.size());
  const MeasurementPlan plan =
      plan_measurements(sparsity, basis.padded_n, params.c);
  const SensingMatrix phi = sample_matrix(
      stream_seed(seed, SeedStream::kSensing), plan.k, basis.padded_n);
  Rng noise_rng = make_rng(stream_seed(seed, SeedStream::kNoise));
  ReleaseRecord out = compressive_release_with(d, basis, sparsity, phi, epsilon,
                                               params, noise_rng);
  out.seed = seed;
  return out;
}

// D + Lap(1/epsilon)^n. The identity query has L1 sensitivity 1.
inline ReleaseRecord laplacian_baseline(std::span<const double> d,
                                        double epsilon, std::uint64_t seed,
                                        bool noise = true,
                                        BudgetLedger* ledger = nullptr) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("laplacian_baseline: epsilon must be > 0");
  }
  if (ledger != nullptr) ledger->spend("laplace baseline", epsilon);
  Rng rng = make_rng(stream_seed(seed, SeedStream::kNoise));
  ReleaseRecord out;
  out.d_star = laplacian_mechanism(d, 1.0, epsilon, rng, noise);
  out.mechanism = MechanismKind::kLaplace;
  out.epsilon_spent = epsilon;
  out.seed = seed;
  return out;
}

// Candidate sparsities: every S in [1, n] up to 4096, else powers of two
// plus n itself.
inline std::vector<std::size_t> sparsity_candidates(std::size_t n) {
  std::vector<std::size_t> out;
  if (n <= 4096) {
    out.resize(n);
    for (std::size_t s = 1; s <= n; ++s) out[s - 1] = s;
    return out;
  }
  for (std::size_t s = 1; s < n; s *= 2) out.push_back(s);
  out.push_back(n);
  return out;
}

// u(D, S) = c2 ||x - x_S||_1 / sqrt(S) + c4 k(S) / epsilon for each
// candidate S, where x = Psi^T D and k(S) is the planned measurement count.
inline std::vector<double> utility_profile(
    std::span<const double> d, BasisKind basis_kind,
    std::span<const std::size_t> candidates, double epsilon_release,
    const PrivacyParams& params) {
  if (!(epsilon_release > 0.0)) {
    throw std::invalid_argument("utility: epsilon_release must be > 0");
  }
  const SparseBasis basis = build_basis(basis_kind, d.size());
  const Vector x = forward(basis, d);
  std::vector<double> mags(x.size());
  std::transform(x.begin(), x.end(), mags.begin(),
                 [](double v) { return std::abs(v); });
  std::sort(mags.begin(), mags.end());
  // prefix[i] = sum of the i smallest magnitudes.
  std::vector<double> prefix(mags.size() + 1, 0.0);
  for (std::size_t i = 0; i < mags.size(); ++i) {
    prefix[i + 1] = prefix[i] + mags[i];
  }

  std::vector<double> out;
  out.reserve(candidates.size());
  for (std::size_t s : candidates) {
    if (s == 0 || s > d.size()) {
      throw std::invalid_argument("utility: S=" + std::to_string(s) +
                                  " outside [1, " + std::to_string(d.size()) +
                                  "]");
    }
    const double tail = prefix[mags.size() - s];
    const std::size_t k = plan_measurements(s, basis.padded_n, params.c).k;
    out.push_back(params.c2 * tail / std::sqrt(static_cast<double>(s)) +
                  params.c4 * static_cast<double>(k) / epsilon_release);
  }
  return out;
}

inline double utility_of_s(std::span<const double> d, BasisKind basis_kind,
                           std::size_t sparsity, double epsilon_release,
                           const PrivacyParams& params) {
  const std::size_t one[] = {sparsity};
  return utility_profile(d, basis_kind, one, epsilon_release, params)[0];
}

// Sensitivity of the utility at S: c5 / sqrt(S).
inline double utility_sensitivity(std::size_t sparsity,
                                  const PrivacyParams& params) {
  return params.c5 / std::sqrt(static_cast<double>(sparsity));
}

// Selection probabilities over sparsity_candidates(n). Exposed for tests
// and for the choose-s subcommand's diagnostics.
inline std::vector<double> sparsity_selection_probabilities(
    std::span<const double> d, BasisKind basis_kind, double epsilon_select,
    double epsilon_release, const PrivacyParams& params) {
  const std::vector<std::size_t> cands = sparsity_candidates(d.size());
  const std::vector<double> u =
      utility_profile(d, basis_kind, cands, epsilon_release, params);
  std::vector<double> sens(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    sens[i] = utility_sensitivity(cands[i], params);
  }
  return exponential_mechanism_probabilities(u, sens, epsilon_select);
}

// Private choice of S via the exponential mechanism.
inline std::size_t choose_sparsity(std::span<const double> d,
                                   BasisKind basis_kind, double epsilon_select,
                                   double epsilon_release,
                                   const PrivacyParams& params, Rng& rng,
                                   BudgetLedger* ledger = nullptr) {
  if (!(epsilon_select > 0.0)) {
    throw std::invalid_argument(
        "choose_sparsity: epsilon_select must be > 0; pass S explicitly "
        "instead");
  }
  if (d.empty()) throw std::invalid_argument("choose_sparsity: empty D");
  if (ledger != nullptr) ledger->spend("sparsity selection", epsilon_select);
  const std::vector<std::size_t> cands = sparsity_candidates(d.size());
  const std::vector<double> u =
      utility_profile(d, basis_kind, cands, epsilon_release, params);
  std::vector<double> sens(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    sens[i] = utility_sensitivity(cands[i], params);
  }
  return cands[exponential_mechanism_index(u, sens, epsilon_select, rng)];
}

// End-to-end private release: picks S privately when not given, then runs
// the compressive mechanism on the remaining budget. Total spend never
// exceeds params.epsilon.
inline ReleaseRecord private_compressive_release(
    std::span<const double> d, BasisKind basis_kind,
    std::optional<std::size_t> sparsity, const PrivacyParams& params,
    std::uint64_t seed, BudgetLedger& ledger) {
  params.validate();
  if (sparsity.has_value()) {
    return compressive_mechanism(d, basis_kind, *sparsity, params.epsilon,
                                 params, seed, &ledger);
  }
  const BudgetSplit split = budget_split(params);
  Rng select_rng = make_rng(stream_seed(seed, SeedStream::kSelect));
  const std::size_t s = choose_sparsity(
      d, basis_kind, split.select, split.release, params, select_rng, &ledger);
  ReleaseRecord out = compressive_mechanism(d, basis_kind, s, split.release,
                                            params, seed, &ledger);
  out.epsilon_spent = split.select + split.release;
  return out;
}

}  // namespace cmech
