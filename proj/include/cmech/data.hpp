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

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cmech/bases.hpp"
#include "cmech/numerics.hpp"
#include "cmech/random.hpp"

namespace cmech {

// "lines": one number per line. "csv:<col>": 0-based column of a comma
// separated file; a first line whose field is not numeric is a header.
struct InputFormat {
  bool csv = false;
  std::size_t column = 0;
};

inline InputFormat parse_input_format(std::string_view spec) {
  if (spec == "lines") return {};
  if (spec.starts_with("csv:")) {
    std::size_t col = 0;
    const std::string_view digits = spec.substr(4);
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), col);
    if (ec != std::errc() || ptr != digits.data() + digits.size() ||
        digits.empty()) {
      throw std::invalid_argument("bad input format '" + std::string(spec) +
                                  "' (expected lines or csv:<column>)");
    }
    return {true, col};
  }
  throw std::invalid_argument("bad input format '" + std::string(spec) +
                              "' (expected lines or csv:<column>)");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view s, double* out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(*out);
}

inline std::string_view csv_field(std::string_view line, std::size_t column) {
  for (std::size_t c = 0; c < column; ++c) {
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) return {};
    line.remove_prefix(comma + 1);
  }
  return line.substr(0, line.find(','));
}

}  // namespace detail

// Reads one real per record. Blank lines are skipped. Errors name the
// 1-based line number.
inline Vector ingest(std::istream& in, const InputFormat& format,
                     const std::string& source = "input") {
  Vector out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::string_view field = format.csv
                                       ? detail::csv_field(line, format.column)
                                       : std::string_view(line);
    double v = 0.0;
    if (!detail::parse_double(field, &v)) {
      if (format.csv && out.empty() && line_no == 1) continue;  // header
      throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                  ": cannot parse '" + std::string(field) +
                                  "' as a number");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw std::invalid_argument(source + ": no data records");
  }
  return out;
}

inline Vector ingest(const std::string& path, const InputFormat& format = {}) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return ingest(in, format, path);
}

enum class SynthKind { kExactSparse, kCompressible };

inline SynthKind parse_synth_kind(std::string_view s) {
  if (s == "exact-sparse") return SynthKind::kExactSparse;
  if (s == "compressible") return SynthKind::kCompressible;
  throw std::invalid_argument("unknown synth kind '" + std::string(s) +
                              "' (expected exact-sparse|compressible)");
}

struct SynthSpec {
  SynthKind kind = SynthKind::kExactSparse;
  std::size_t n = 256;
  std::size_t sparsity = 8;  // exact-sparse
  double p = 0.5;            // compressible decay exponent
  double amplitude = 1.0;    // R: coefficient magnitude scale
  BasisKind basis = BasisKind::kHaar;

  void validate() const {
    if (n == 0) throw std::invalid_argument("synth: n must be >= 1");
    if (kind == SynthKind::kExactSparse && sparsity > n) {
      throw std::invalid_argument("synth: S must be <= n");
    }
    if (kind == SynthKind::kCompressible && !(p > 0.0 && p < 1.0)) {
      throw std::invalid_argument("synth: p must lie in (0, 1)");
    }
    if (!(amplitude > 0.0)) {
      throw std::invalid_argument("synth: amplitude R must be > 0");
    }
  }
};

// Coefficient vector of length padded_n.
//  exact-sparse: S positions chosen uniformly, values +-R.
//  compressible: the i-th largest magnitude is R i^(-1/p), random sign,
//                randomly permuted positions.
inline Vector synth_coefficients(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const SparseBasis basis = build_basis(spec.basis, spec.n);
  const std::size_t m = basis.padded_n;
  Rng rng = make_rng(seed);
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  // Fisher-Yates with explicit bounded draws for portability.
  for (std::size_t i = m; i > 1; --i) {
    const auto j =
        static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
  }
  Vector x(m, 0.0);
  if (spec.kind == SynthKind::kExactSparse) {
    for (std::size_t i = 0; i < spec.sparsity; ++i) {
      x[perm[i]] = (rng() >> 63) ? spec.amplitude : -spec.amplitude;
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      const double mag =
          spec.amplitude * std::pow(static_cast<double>(i + 1), -1.0 / spec.p);
      x[perm[i]] = (rng() >> 63) ? mag : -mag;
    }
  }
  return x;
}

// D = Psi x for the synthesized coefficients, truncated to n.
inline Vector synth(const SynthSpec& spec, std::uint64_t seed) {
  const SparseBasis basis = build_basis(spec.basis, spec.n);
  return inverse(basis, synth_coefficients(spec, seed));
}

}  // namespace cmech
