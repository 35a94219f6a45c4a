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

// Symmetric Bernoulli sensing matrices with entries +-1/sqrt(k).
//
// Entries come from a counter-mode generator keyed on (seed, column, word),
// so column j of a k x n matrix is exactly sensing_row(seed, j + 1, k). The
// streaming mechanism relies on this to regenerate [Phi_1 ... Phi_t] without
// storing it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmech/bases.hpp"
#include "cmech/numerics.hpp"
#include "cmech/random.hpp"

namespace cmech {

inline constexpr double kDefaultOversampling = 4.0;
// Matrices above this many entries are regenerated column by column.
inline constexpr std::size_t kMaterializeLimit = std::size_t{1} << 26;

struct MeasurementPlan {
  std::size_t sparsity = 0;
  std::size_t n = 0;
  double oversampling = kDefaultOversampling;
  std::size_t k = 0;
};

// k = min(n, ceil(C * S * max(log2(n / S), 1))).
inline MeasurementPlan plan_measurements(
    std::size_t sparsity, std::size_t n,
    double oversampling = kDefaultOversampling) {
  if (sparsity == 0 || sparsity > n) {
    throw std::invalid_argument("plan_measurements: need 1 <= S <= n, got S=" +
                                std::to_string(sparsity) +
                                ", n=" + std::to_string(n));
  }
  if (!(oversampling > 0.0)) {
    throw std::invalid_argument("plan_measurements: C must be positive");
  }
  const double log_term = std::max(
      std::log2(static_cast<double>(n) / static_cast<double>(sparsity)), 1.0);
  const double raw = oversampling * static_cast<double>(sparsity) * log_term;
  // Shave accumulated rounding so exact products like 4*8*5 stay at 160.
  const auto k = static_cast<std::size_t>(std::ceil(raw * (1.0 - 1e-12)));
  return MeasurementPlan{sparsity, n, oversampling,
                         std::clamp<std::size_t>(k, 1, n)};
}

namespace detail {

inline std::size_t words_for(std::size_t k) { return (k + 63) / 64; }

// Sign bits of column t (1-based). Bit i set means +1.
inline void column_bits(std::uint64_t seed, std::uint64_t t, std::size_t k,
                        std::span<std::uint64_t> out) {
  for (std::size_t w = 0; w < words_for(k); ++w) {
    out[w] = derive_seed(seed, {t, w});
  }
}

inline bool bit_at(std::span<const std::uint64_t> bits, std::size_t i) {
  return (bits[i / 64] >> (i % 64)) & 1U;
}

}  // namespace detail

// Phi_t in R^k for the streaming mechanism.
inline Vector sensing_row(std::uint64_t seed, std::uint64_t t, std::size_t k) {
  if (t == 0 || k == 0) {
    throw std::invalid_argument("sensing_row: need t >= 1 and k >= 1");
  }
  std::vector<std::uint64_t> bits(detail::words_for(k));
  detail::column_bits(seed, t, k, bits);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  Vector v(k);
  for (std::size_t i = 0; i < k; ++i) {
    v[i] = detail::bit_at(bits, i) ? scale : -scale;
  }
  return v;
}

class SensingMatrix {
 public:
  SensingMatrix(std::uint64_t seed, std::size_t k, std::size_t n)
      : seed_(seed), k_(k), n_(n), words_(detail::words_for(k)) {
    if (k == 0 || n == 0) {
      throw std::invalid_argument("SensingMatrix: need k >= 1 and n >= 1");
    }
    if (k * n <= kMaterializeLimit) {
      bits_.resize(words_ * n_);
      for (std::size_t j = 0; j < n_; ++j) {
        detail::column_bits(seed_, j + 1, k_,
                            std::span(bits_).subspan(j * words_, words_));
      }
    }
  }

  std::uint64_t seed() const { return seed_; }
  std::size_t rows() const { return k_; }
  std::size_t cols() const { return n_; }
  bool materialized() const { return !bits_.empty(); }
  double magnitude() const { return 1.0 / std::sqrt(static_cast<double>(k_)); }

  double operator()(std::size_t i, std::size_t j) const {
    std::vector<std::uint64_t> scratch;
    return detail::bit_at(column(j, scratch), i) ? magnitude() : -magnitude();
  }

  // y = Phi d. Signs are accumulated first and scaled once.
  Vector apply(std::span<const double> d) const {
    if (d.size() != n_) {
      throw std::invalid_argument("SensingMatrix::apply: input length " +
                                  std::to_string(d.size()) + " != n " +
                                  std::to_string(n_));
    }
    Vector y(k_, 0.0);
    std::vector<std::uint64_t> scratch;
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = d[j];
      if (v == 0.0) continue;
      auto bits = column(j, scratch);
      for (std::size_t i = 0; i < k_; ++i) {
        y[i] += detail::bit_at(bits, i) ? v : -v;
      }
    }
    const double m = magnitude();
    for (double& v : y) v *= m;
    return y;
  }

  DenseMatrix to_dense() const {
    DenseMatrix out(k_, n_);
    const double m = magnitude();
    if (materialized()) {
      // Row-major fill; the packed bits are small enough to stay in cache.
      for (std::size_t i = 0; i < k_; ++i) {
        const std::size_t word = i / 64;
        const std::size_t shift = i % 64;
        auto row = out.row(i);
        for (std::size_t j = 0; j < n_; ++j) {
          row[j] = (bits_[j * words_ + word] >> shift) & 1U ? m : -m;
        }
      }
      return out;
    }
    std::vector<std::uint64_t> scratch;
    for (std::size_t j = 0; j < n_; ++j) {
      auto bits = column(j, scratch);
      for (std::size_t i = 0; i < k_; ++i) {
        out(i, j) = detail::bit_at(bits, i) ? m : -m;
      }
    }
    return out;
  }

 private:
  std::span<const std::uint64_t> column(
      std::size_t j, std::vector<std::uint64_t>& scratch) const {
    if (materialized()) {
      return std::span<const std::uint64_t>(bits_).subspan(j * words_, words_);
    }
    scratch.resize(words_);
    detail::column_bits(seed_, j + 1, k_, scratch);
    return scratch;
  }

  std::uint64_t seed_;
  std::size_t k_;
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;  // column-major sign bits
};

inline SensingMatrix sample_matrix(std::uint64_t seed, std::size_t k,
                                   std::size_t n) {
  return SensingMatrix(seed, k, n);
}

inline Vector apply(const SensingMatrix& phi, std::span<const double> d) {
  return phi.apply(d);
}

// A = Phi Psi as a dense k x padded_n matrix.
inline DenseMatrix compose(const SensingMatrix& phi, const SparseBasis& basis) {
  if (phi.cols() != basis.padded_n) {
    throw std::invalid_argument(
        "compose: sensing matrix has " + std::to_string(phi.cols()) +
        " columns, basis padded_n is " + std::to_string(basis.padded_n));
  }
  DenseMatrix a = phi.to_dense();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    detail::analyze(basis.kind, a.row(i));
  }
  return a;
}

}  // namespace cmech
