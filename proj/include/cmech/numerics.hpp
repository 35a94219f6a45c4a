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

// Small dense kernel used by sparse recovery and the error metrics: norms,
// top-S thresholding and least squares restricted to a column support.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cmech {

using Vector = std::vector<double>;

struct NumericTolerances {
  // Supports at or below this size use the dense normal-equation solve.
  std::size_t dense_support_limit = 64;
  double cg_tolerance = 1e-10;
  // CG iteration cap is cg_iteration_factor * rows.
  std::size_t cg_iteration_factor = 10;
  // Relative pivot threshold for the rank-revealing factorization.
  double rank_threshold = 1e-12;
};

inline constexpr NumericTolerances kDefaultTolerances{};

// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}
  DenseMatrix(std::size_t rows, std::size_t cols, Vector entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_) {
      throw std::invalid_argument(
          "DenseMatrix: entries length " + std::to_string(entries_.size()) +
          " != rows*cols " + std::to_string(rows_ * cols_));
    }
    for (double v : entries_) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("DenseMatrix: non-finite entry");
      }
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return entries_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {entries_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }

  const Vector& entries() const { return entries_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector entries_;
};

// Sorted, duplicate-free column indices.
class SupportSet {
 public:
  SupportSet() = default;

  // Sorts and deduplicates; every index must be < n.
  SupportSet(std::vector<std::size_t> indices, std::size_t n)
      : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()),
                   indices_.end());
    if (!indices_.empty() && indices_.back() >= n) {
      throw std::invalid_argument("SupportSet: index " +
                                  std::to_string(indices_.back()) +
                                  " out of range for n=" + std::to_string(n));
    }
  }

  static SupportSet merge(const SupportSet& a, const SupportSet& b) {
    SupportSet out;
    std::set_union(a.indices_.begin(), a.indices_.end(), b.indices_.begin(),
                   b.indices_.end(), std::back_inserter(out.indices_));
    return out;
  }

  // Nonzero positions of x.
  static SupportSet of(std::span<const double> x) {
    SupportSet out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != 0.0) out.indices_.push_back(i);
    }
    return out;
  }

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const std::vector<std::size_t>& indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<std::size_t> indices_;
};

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double norm1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline std::size_t count_nonzero(std::span<const double> x) {
  return static_cast<std::size_t>(
      std::count_if(x.begin(), x.end(), [](double v) { return v != 0.0; }));
}

inline Vector multiply(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) {
    throw std::invalid_argument("multiply: vector length mismatch");
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
  return y;
}

// A^T r.
inline Vector multiply_transpose(const DenseMatrix& a,
                                 std::span<const double> r) {
  if (r.size() != a.rows()) {
    throw std::invalid_argument("multiply_transpose: vector length mismatch");
  }
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double ri = r[i];
    if (ri == 0.0) continue;
    auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += ri * row[j];
  }
  return out;
}

// Indices of the s entries of largest magnitude, ties broken by lowest index.
// Returned sorted ascending.
inline std::vector<std::size_t> top_s_indices(std::span<const double> x,
                                              std::size_t s) {
  if (s > x.size()) {
    throw std::invalid_argument("top_s_indices: S=" + std::to_string(s) +
                                " exceeds length " + std::to_string(x.size()));
  }
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto larger = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(x[a]);
    const double mb = std::abs(x[b]);
    return ma != mb ? ma > mb : a < b;
  };
  if (s < order.size()) {
    std::nth_element(order.begin(), order.begin() + static_cast<long>(s),
                     order.end(), larger);
  }
  order.resize(s);
  std::sort(order.begin(), order.end());
  return order;
}

// Keeps the s largest-magnitude entries of x and zeroes the rest.
inline Vector hard_threshold_top_s(std::span<const double> x, std::size_t s) {
  Vector out(x.size(), 0.0);
  for (std::size_t i : top_s_indices(x, s)) out[i] = x[i];
  return out;
}

struct LeastSquaresSolution {
  Vector x;  // full length, zero off the support
  std::size_t rank = 0;
  // Set when the restricted system was rank deficient (dense path) or CG
  // stopped at its iteration cap. The solution is still returned.
  bool rank_deficient = false;
  bool converged = true;
};

namespace detail {

// CG on the normal equations A_T^T A_T z = A_T^T y, started at zero so that a
// consistent singular system converges to the minimum-norm solution.
inline Vector cg_normal_equations(const Eigen::MatrixXd& at,
                                  const Eigen::VectorXd& y, double tol,
                                  std::size_t max_iter, bool* converged) {
  const Eigen::VectorXd b = at.transpose() * y;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(at.cols());
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  const double stop = tol * tol * std::max(b.squaredNorm(), 1e-300);
  *converged = rs <= stop;
  for (std::size_t it = 0; it < max_iter && !*converged; ++it) {
    const Eigen::VectorXd ap = at.transpose() * (at * p);
    const double pap = p.dot(ap);
    if (pap <= 0.0) break;
    const double alpha = rs / pap;
    z += alpha * p;
    r -= alpha * ap;
    const double rs_next = r.squaredNorm();
    if (rs_next <= stop) {
      *converged = true;
      break;
    }
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  return Vector(z.data(), z.data() + z.size());
}

}  // namespace detail

// Minimizes ||A_supp z - y||_2 and scatters z back to length A.cols().
inline LeastSquaresSolution least_squares_on_support(
    const DenseMatrix& a, std::span<const double> y, const SupportSet& supp,
    const NumericTolerances& tol = kDefaultTolerances) {
  if (y.size() != a.rows()) {
    throw std::invalid_argument("least_squares_on_support: y has length " +
                                std::to_string(y.size()) + ", expected " +
                                std::to_string(a.rows()));
  }
  LeastSquaresSolution out;
  out.x.assign(a.cols(), 0.0);
  const std::size_t s = supp.size();
  if (s == 0) return out;
  if (supp.indices().back() >= a.cols()) {
    throw std::invalid_argument(
        "least_squares_on_support: support index out "
        "of range");
  }

  Eigen::MatrixXd at(a.rows(), s);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    std::size_t c = 0;
    for (std::size_t j : supp) at(r, c++) = row[j];
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(),
                                             static_cast<long>(y.size()));

  Vector z;
  if (s <= tol.dense_support_limit) {
    const Eigen::MatrixXd gram = at.transpose() * at;
    const Eigen::VectorXd rhs = at.transpose() * yv;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
    cod.setThreshold(tol.rank_threshold);
    const Eigen::VectorXd sol = cod.solve(rhs);
    out.rank = static_cast<std::size_t>(cod.rank());
    out.rank_deficient = out.rank < s;
    z.assign(sol.data(), sol.data() + sol.size());
  } else {
    bool converged = false;
    z = detail::cg_normal_equations(at, yv, tol.cg_tolerance,
                                    tol.cg_iteration_factor * a.rows(),
                                    &converged);
    out.converged = converged;
    out.rank = s;
    out.rank_deficient = !converged;
  }

  std::size_t c = 0;
  for (std::size_t j : supp) out.x[j] = z[c++];
  return out;
}

}  // namespace cmech
