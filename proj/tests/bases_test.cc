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

#include "cmech/bases.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace cmech {
namespace {

using ::testing::DoubleNear;
using ::testing::ElementsAre;

// Orthonormal DCT-II evaluated directly from its definition.
Vector BruteForceDct(const Vector& d) {
  const std::size_t n = d.size();
  Vector x(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      s += d[j] * std::cos(std::numbers::pi * m * (j + 0.5) / n);
    }
    x[m] = s * std::sqrt((m == 0 ? 1.0 : 2.0) / n);
  }
  return x;
}

Vector RandomVector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  Vector v(n);
  for (double& x : v) x = u(rng);
  return v;
}

TEST(BuildBasisTest, PaddingRules) {
  EXPECT_EQ(build_basis(BasisKind::kHaar, 4).padded_n, 4u);
  EXPECT_EQ(build_basis(BasisKind::kHaar, 5).padded_n, 8u);
  EXPECT_EQ(build_basis(BasisKind::kCosine, 7).padded_n, 7u);
  EXPECT_EQ(build_basis(BasisKind::kIdentity, 7).padded_n, 7u);
  EXPECT_THROW(build_basis(BasisKind::kHaar, 0), std::invalid_argument);
}

TEST(BuildBasisTest, ParsesKindNames) {
  EXPECT_EQ(parse_basis_kind("haar"), BasisKind::kHaar);
  EXPECT_EQ(parse_basis_kind("cosine"), BasisKind::kCosine);
  EXPECT_EQ(parse_basis_kind("identity"), BasisKind::kIdentity);
  EXPECT_THROW(parse_basis_kind("db4"), std::invalid_argument);
}

TEST(HaarTest, ConstantVector) {
  const auto b = build_basis(BasisKind::kHaar, 4);
  EXPECT_THAT(forward(b, Vector{1, 1, 1, 1}),
              ElementsAre(DoubleNear(2, 1e-12), DoubleNear(0, 1e-12),
                          DoubleNear(0, 1e-12), DoubleNear(0, 1e-12)));
  EXPECT_THAT(inverse(b, Vector{2, 0, 0, 0}),
              ElementsAre(DoubleNear(1, 1e-12), DoubleNear(1, 1e-12),
                          DoubleNear(1, 1e-12), DoubleNear(1, 1e-12)));
}

TEST(HaarTest, MatchesExplicitMatrix) {
  // Rows of the 4x4 orthonormal Haar analysis matrix in coarse-to-fine order.
  const double h = 0.5;
  const double r = 1.0 / std::sqrt(2.0);
  const double psi_t[4][4] = {
      {h, h, h, h}, {h, h, -h, -h}, {r, -r, 0, 0}, {0, 0, r, -r}};
  const Vector d{1, -1, 0, 0};
  Vector oracle(4, 0.0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) oracle[i] += psi_t[i][j] * d[j];
  }
  const Vector x = forward(build_basis(BasisKind::kHaar, 4), d);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(x[i], oracle[i], 1e-12);
  EXPECT_NEAR(x[2], 1.41421, 1e-5);
}

TEST(HaarTest, ConstantVectorHasOneNonzeroCoefficient) {
  for (std::size_t n : {2u, 8u, 64u, 1024u}) {
    const Vector x = forward(build_basis(BasisKind::kHaar, n), Vector(n, 3.5));
    std::size_t nnz = 0;
    for (double v : x) nnz += std::abs(v) > 1e-9;
    EXPECT_EQ(nnz, 1u) << "n=" << n;
  }
}

TEST(HaarTest, NonPowerOfTwoPadsWithZeros) {
  const auto b = build_basis(BasisKind::kHaar, 5);
  const Vector d{1, 2, 3, 4, 5};
  const Vector x = forward(b, d);
  ASSERT_EQ(x.size(), 8u);
  EXPECT_NEAR(norm2(x), norm2(d), 1e-12);
  const Vector back = inverse(b, x);
  ASSERT_EQ(back.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(back[i], d[i], 1e-12);
}

TEST(CosineTest, TwoPointClosedForm) {
  const auto b = build_basis(BasisKind::kCosine, 2);
  const Vector x = forward(b, Vector{1, 0});
  EXPECT_THAT(
      x, ElementsAre(DoubleNear(0.70711, 1e-5), DoubleNear(0.70711, 1e-5)));
  const Vector d = inverse(b, Vector{0.70711, 0.70711});
  EXPECT_THAT(d, ElementsAre(DoubleNear(1, 1e-5), DoubleNear(0, 1e-5)));
}

TEST(CosineTest, MatchesDirectEvaluation) {
  std::mt19937_64 rng(17);
  for (std::size_t n = 1; n <= 64; ++n) {
    const Vector d = RandomVector(rng, n);
    const Vector fast = forward(build_basis(BasisKind::kCosine, n), d);
    const Vector slow = BruteForceDct(d);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_NEAR(fast[i], slow[i], 1e-10) << "n=" << n << " i=" << i;
    }
  }
}

TEST(IdentityTest, PassesThrough) {
  const auto b = build_basis(BasisKind::kIdentity, 2);
  EXPECT_THAT(inverse(b, Vector{5, 6}), ElementsAre(5, 6));
  EXPECT_THAT(forward(b, Vector{5, 6}), ElementsAre(5, 6));
}

TEST(TransformTest, LengthMismatchThrows) {
  const auto b = build_basis(BasisKind::kHaar, 5);
  EXPECT_THROW(forward(b, Vector(4)), std::invalid_argument);
  EXPECT_THROW(inverse(b, Vector(5)), std::invalid_argument);
}

class BasisPropertyTest : public ::testing::TestWithParam<BasisKind> {};

TEST_P(BasisPropertyTest, RoundTripAndParseval) {
  std::mt19937_64 rng(static_cast<unsigned>(GetParam()) + 1);
  std::uniform_int_distribution<std::size_t> dim(4, 1024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = dim(rng);
    const auto b = build_basis(GetParam(), n);
    const Vector d = RandomVector(rng, n);
    const Vector x = forward(b, d);
    ASSERT_NEAR(norm2(x), norm2(d), 1e-9 * (1 + norm2(d)));
    const Vector back = inverse(b, x);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(back[i] - d[i]));
    }
    ASSERT_LT(worst, 1e-9) << "n=" << n;
  }
}

TEST_P(BasisPropertyTest, ImpliedMatrixIsOrthonormal) {
  for (std::size_t n : {8u, 13u, 32u}) {
    const auto b = build_basis(GetParam(), n);
    const std::size_t m = b.padded_n;
    // Columns of Psi are the synthesized unit coefficient vectors; the
    // padded basis is exercised at length m.
    const auto full = build_basis(GetParam(), m);
    std::vector<Vector> cols;
    for (std::size_t j = 0; j < m; ++j) {
      Vector e(m, 0.0);
      e[j] = 1.0;
      cols.push_back(inverse(full, e));
    }
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t c = 0; c < m; ++c) {
        ASSERT_NEAR(dot(cols[a], cols[c]), a == c ? 1.0 : 0.0, 1e-10);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllKinds, BasisPropertyTest,
                         ::testing::Values(BasisKind::kHaar, BasisKind::kCosine,
                                           BasisKind::kIdentity),
                         [](const auto& info) {
                           return std::string(to_string(info.param));
                         });

}  // namespace
}  // namespace cmech
