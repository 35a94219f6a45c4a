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

// Orthonormal sparsifying bases. The basis matrix Psi is never formed:
// forward() computes x = Psi^T D and inverse() computes D = Psi x.
//
// Haar coefficients are laid out coarse to fine:
//   [approximation, level-L detail, level-(L-1) details, ..., finest details]
// Cosine is the orthonormal DCT-II (inverse is the orthonormal DCT-III).

#pragma once

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmech/numerics.hpp"

namespace cmech {

enum class BasisKind { kHaar, kCosine, kIdentity };

inline std::string_view to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::kHaar:
      return "haar";
    case BasisKind::kCosine:
      return "cosine";
    case BasisKind::kIdentity:
      return "identity";
  }
  return "unknown";
}

inline BasisKind parse_basis_kind(std::string_view name) {
  if (name == "haar") return BasisKind::kHaar;
  if (name == "cosine") return BasisKind::kCosine;
  if (name == "identity") return BasisKind::kIdentity;
  throw std::invalid_argument("unknown basis kind '" + std::string(name) +
                              "' (expected haar|cosine|identity)");
}

struct SparseBasis {
  BasisKind kind = BasisKind::kIdentity;
  std::size_t n = 0;
  std::size_t padded_n = 0;
};

inline SparseBasis build_basis(BasisKind kind, std::size_t n) {
  if (n == 0) throw std::invalid_argument("build_basis: n must be >= 1");
  const std::size_t padded = kind == BasisKind::kHaar ? std::bit_ceil(n) : n;
  return SparseBasis{kind, n, padded};
}

namespace detail {

// In-place orthonormal Haar analysis on a power-of-two length buffer.
inline void haar_forward_inplace(std::span<double> a) {
  static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<double> tmp(a.size());
  for (std::size_t len = a.size(); len > 1; len /= 2) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const double lo = a[2 * i];
      const double hi = a[2 * i + 1];
      tmp[i] = (lo + hi) * kInvSqrt2;
      tmp[half + i] = (lo - hi) * kInvSqrt2;
    }
    std::copy_n(tmp.begin(), len, a.begin());
  }
}

inline void haar_inverse_inplace(std::span<double> a) {
  static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<double> tmp(a.size());
  for (std::size_t len = 2; len <= a.size(); len *= 2) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const double avg = a[i];
      const double det = a[half + i];
      tmp[2 * i] = (avg + det) * kInvSqrt2;
      tmp[2 * i + 1] = (avg - det) * kInvSqrt2;
    }
    std::copy_n(tmp.begin(), len, a.begin());
  }
}

// FFTW plans are cached per (length, kind). Plan creation is not thread
// safe in FFTW, so it is serialized; execution with the new-array interface
// is safe from any thread.
class DctPlans {
 public:
  static DctPlans& instance() {
    static DctPlans plans;
    return plans;
  }

  void execute(std::size_t n, fftw_r2r_kind kind, std::span<double> data) {
    fftw_plan plan = get(n, kind);
    auto* buf = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    std::copy(data.begin(), data.end(), buf);
    fftw_execute_r2r(plan, buf, buf);
    std::copy_n(buf, n, data.begin());
    fftw_free(buf);
  }

  DctPlans(const DctPlans&) = delete;
  DctPlans& operator=(const DctPlans&) = delete;

 private:
  DctPlans() = default;
  ~DctPlans() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, fftw_r2r_kind kind) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(n, static_cast<int>(kind));
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    auto* buf = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    fftw_plan plan =
        fftw_plan_r2r_1d(static_cast<int>(n), buf, buf, kind, FFTW_ESTIMATE);
    fftw_free(buf);
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mu_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void dct_forward_inplace(std::span<double> a) {
  const std::size_t n = a.size();
  if (n == 1) return;
  // REDFT10 computes Y_k = 2 sum_j a_j cos(pi k (j + 1/2) / n).
  DctPlans::instance().execute(n, FFTW_REDFT10, a);
  const double dn = static_cast<double>(n);
  a[0] *= std::sqrt(1.0 / (4.0 * dn));
  const double s = std::sqrt(1.0 / (2.0 * dn));
  for (std::size_t k = 1; k < n; ++k) a[k] *= s;
}

inline void dct_inverse_inplace(std::span<double> a) {
  const std::size_t n = a.size();
  if (n == 1) return;
  // REDFT01 computes Y_j = a_0 + 2 sum_{k>=1} a_k cos(pi k (j + 1/2) / n).
  const double dn = static_cast<double>(n);
  a[0] *= std::sqrt(1.0 / dn);
  const double s = 1.0 / std::sqrt(2.0 * dn);
  for (std::size_t k = 1; k < n; ++k) a[k] *= s;
  DctPlans::instance().execute(n, FFTW_REDFT01, a);
}

}  // namespace detail

namespace detail {

inline void analyze(BasisKind kind, std::span<double> x) {
  switch (kind) {
    case BasisKind::kHaar:
      haar_forward_inplace(x);
      break;
    case BasisKind::kCosine:
      dct_forward_inplace(x);
      break;
    case BasisKind::kIdentity:
      break;
  }
}

inline void synthesize(BasisKind kind, std::span<double> x) {
  switch (kind) {
    case BasisKind::kHaar:
      haar_inverse_inplace(x);
      break;
    case BasisKind::kCosine:
      dct_inverse_inplace(x);
      break;
    case BasisKind::kIdentity:
      break;
  }
}

}  // namespace detail

// x = Psi^T D, with D zero-padded to basis.padded_n.
inline Vector forward(const SparseBasis& basis, std::span<const double> d) {
  if (d.size() != basis.n) {
    throw std::invalid_argument("forward: input length " +
                                std::to_string(d.size()) + " != basis n " +
                                std::to_string(basis.n));
  }
  Vector x(basis.padded_n, 0.0);
  std::copy(d.begin(), d.end(), x.begin());
  detail::analyze(basis.kind, x);
  return x;
}

// D = Psi x, truncated to basis.n.
inline Vector inverse(const SparseBasis& basis, std::span<const double> x) {
  if (x.size() != basis.padded_n) {
    throw std::invalid_argument("inverse: coefficient length " +
                                std::to_string(x.size()) + " != padded_n " +
                                std::to_string(basis.padded_n));
  }
  Vector d(x.begin(), x.end());
  detail::synthesize(basis.kind, d);
  d.resize(basis.n);
  return d;
}

// Psi^T applied to a full padded_n-length vector, no padding or truncation.
// Rows of A = Phi Psi are formed this way: row_i(A) = Psi^T row_i(Phi).
inline Vector forward_padded(const SparseBasis& basis,
                             std::span<const double> v) {
  if (v.size() != basis.padded_n) {
    throw std::invalid_argument("forward_padded: length mismatch");
  }
  Vector x(v.begin(), v.end());
  detail::analyze(basis.kind, x);
  return x;
}

}  // namespace cmech
