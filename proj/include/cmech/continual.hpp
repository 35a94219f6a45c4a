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

// Pan-private continual release.
//
// TreeCounter is the dyadic-segment counting mechanism: times 1..T (T padded
// to a power of two) are covered by segments of length 2^l, and the prefix
// sum at t is assembled from the segments of t's binary decomposition. Each
// segment's noisy sum is seeded with one Lap(sensitivity (1 + log2 T) / eps)
// draw when the segment opens, then accumulates stream values. No raw value
// or raw partial sum is ever stored.
//
// CmcoEngine runs k tree counters over the randomly projected stream
// u_t = Phi_t D[t] and decodes D*_t by sparse recovery. DifferencingEngine is
// the baseline that subtracts consecutive noisy prefix sums.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <nlohmann/json.hpp>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmech/bases.hpp"
#include "cmech/mechanism.hpp"
#include "cmech/numerics.hpp"
#include "cmech/privacy.hpp"
#include "cmech/random.hpp"
#include "cmech/reconstruct.hpp"
#include "cmech/sensing.hpp"

namespace cmech {

// Closed interval of 1-based times [first, last].
struct Segment {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Disjoint dyadic segments whose union is [1..t], largest first.
inline std::vector<Segment> dyadic_segments(std::uint64_t t,
                                            std::uint64_t horizon) {
  if (horizon == 0) {
    throw std::invalid_argument("dyadic_segments: horizon must be >= 1");
  }
  if (t == 0 || t > horizon) {
    throw std::invalid_argument("dyadic_segments: t=" + std::to_string(t) +
                                " outside [1, " + std::to_string(horizon) +
                                "]");
  }
  std::vector<Segment> out;
  std::uint64_t covered = 0;
  for (int level = std::bit_width(t) - 1; level >= 0; --level) {
    const std::uint64_t len = std::uint64_t{1} << level;
    if (t & len) {
      out.push_back({covered + 1, covered + len});
      covered += len;
    }
  }
  return out;
}

class TreeCounter {
 public:
  struct Slot {
    std::uint64_t index = 0;  // segment index within its level
    double noisy_sum = 0.0;
    bool valid = false;
  };
  struct Level {
    Slot open;    // segment containing the current time, still accumulating
    Slot closed;  // most recently completed segment at this level
  };

  TreeCounter(std::uint64_t horizon, double epsilon, double sensitivity,
              std::uint64_t noise_seed, bool noise = true)
      : horizon_(horizon == 0 ? 0 : std::bit_ceil(horizon)),
        epsilon_(epsilon),
        sensitivity_(sensitivity),
        noise_seed_(noise_seed),
        noise_(noise) {
    if (horizon == 0) {
      throw std::invalid_argument("TreeCounter: horizon must be >= 1");
    }
    if (!(epsilon > 0.0)) {
      throw std::invalid_argument("TreeCounter: epsilon must be > 0");
    }
    if (sensitivity < 0.0) {
      throw std::invalid_argument("TreeCounter: sensitivity must be >= 0");
    }
    levels_.resize(static_cast<std::size_t>(log2_horizon()) + 1);
  }

  std::uint64_t horizon() const { return horizon_; }
  std::uint64_t time() const { return t_; }
  int log2_horizon() const { return std::bit_width(horizon_) - 1; }

  // Laplace scale of every segment: sensitivity (1 + log2 T) / epsilon.
  double segment_scale() const {
    return noise_ ? sensitivity_ * (1.0 + log2_horizon()) / epsilon_ : 0.0;
  }

  // Adds the value for time t, which must be time() + 1. Returns the noisy
  // prefix sum through t.
  double update(std::uint64_t t, double value) {
    if (t != t_ + 1) {
      throw std::invalid_argument(
          "TreeCounter: expected t=" + std::to_string(t_ + 1) + ", got " +
          std::to_string(t));
    }
    if (t > horizon_) {
      throw std::invalid_argument("TreeCounter: t=" + std::to_string(t) +
                                  " exceeds horizon " +
                                  std::to_string(horizon_));
    }
    t_ = t;
    for (std::size_t level = 0; level < levels_.size(); ++level) {
      Level& lv = levels_[level];
      const std::uint64_t index = (t - 1) >> level;
      if (!lv.open.valid || lv.open.index != index) {
        lv.open = {index, segment_noise(level, index), true};
      }
      lv.open.noisy_sum += value;
      if ((t & ((std::uint64_t{1} << level) - 1)) == 0) {
        lv.closed = lv.open;
        lv.open.valid = false;
        lv.open.noisy_sum = 0.0;
      }
    }
    return prefix_sum();
  }

  double update(double value) { return update(t_ + 1, value); }

  // Noisy sum over [1..time()]. Idempotent.
  double prefix_sum() const {
    double total = 0.0;
    for (std::size_t level = 0; level < levels_.size(); ++level) {
      if (((t_ >> level) & 1U) == 0) continue;
      const Slot& slot = levels_[level].closed;
      if (!slot.valid || slot.index != (t_ >> level) - 1) {
        throw InternalError("TreeCounter: missing closed segment at level " +
                            std::to_string(level));
      }
      total += slot.noisy_sum;
    }
    return total;
  }

  // Number of Laplace terms in prefix_sum() at time t.
  static std::size_t noise_terms(std::uint64_t t) {
    return static_cast<std::size_t>(std::popcount(t));
  }

  const std::vector<Level>& levels() const { return levels_; }

  nlohmann::json to_json() const {
    nlohmann::json levels = nlohmann::json::array();
    for (const Level& lv : levels_) {
      levels.push_back(
          {{"open", slot_json(lv.open)}, {"closed", slot_json(lv.closed)}});
    }
    return {{"horizon", horizon_},       {"t", t_},
            {"epsilon", epsilon_},       {"sensitivity", sensitivity_},
            {"noise_seed", noise_seed_}, {"noise", noise_},
            {"levels", levels}};
  }

  // Fixed-layout binary image. Its size depends only on the horizon.
  std::vector<std::byte> serialize() const {
    std::vector<std::byte> out;
    append(out, horizon_);
    append(out, t_);
    append(out, epsilon_);
    append(out, sensitivity_);
    append(out, noise_seed_);
    append(out, static_cast<std::uint8_t>(noise_));
    for (const Level& lv : levels_) {
      for (const Slot* s : {&lv.open, &lv.closed}) {
        append(out, s->index);
        append(out, s->noisy_sum);
        append(out, static_cast<std::uint8_t>(s->valid));
      }
    }
    return out;
  }

 private:
  double segment_noise(std::size_t level, std::uint64_t index) const {
    const double scale = segment_scale();
    if (scale == 0.0) return 0.0;
    Rng rng = make_rng(noise_seed_, {level, index});
    return laplace(scale, rng);
  }

  static nlohmann::json slot_json(const Slot& s) {
    return {{"index", s.index}, {"noisy_sum", s.noisy_sum}, {"valid", s.valid}};
  }

  template <typename T>
  static void append(std::vector<std::byte>& out, const T& v) {
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
  }

  std::uint64_t horizon_;
  double epsilon_;
  double sensitivity_;
  std::uint64_t noise_seed_;
  bool noise_;
  std::uint64_t t_ = 0;
  std::vector<Level> levels_;
};

// Streaming compressive mechanism. Single writer; observe() must be called
// once per time step in order.
class CmcoEngine {
 public:
  CmcoEngine(std::uint64_t horizon, std::size_t sparsity, BasisKind basis,
             const PrivacyParams& params, std::uint64_t seed)
      : horizon_(horizon),
        sparsity_(sparsity),
        basis_(basis),
        params_(params),
        seed_(seed) {
    params_.validate();
    if (horizon == 0) {
      throw std::invalid_argument("CmcoEngine: horizon must be >= 1");
    }
    k_ = plan_measurements(sparsity, horizon, params.c).k;
    const double sens = 1.0 / std::sqrt(static_cast<double>(k_));
    const std::uint64_t noise_seed = stream_seed(seed, SeedStream::kNoise);
    counters_.reserve(k_);
    for (std::size_t i = 0; i < k_; ++i) {
      counters_.emplace_back(horizon, params.epsilon, sens,
                             derive_seed(noise_seed, {i}), params.noise);
    }
  }

  std::uint64_t horizon() const { return horizon_; }
  std::uint64_t time() const { return t_; }
  std::size_t k() const { return k_; }
  std::size_t sparsity() const { return sparsity_; }
  BasisKind basis() const { return basis_; }
  std::uint64_t sensing_seed() const {
    return stream_seed(seed_, SeedStream::kSensing);
  }

  // Ingests D[t] for t = time() + 1.
  void observe(double value) {
    if (t_ + 1 > horizon_) {
      throw std::invalid_argument("CmcoEngine: stream longer than horizon " +
                                  std::to_string(horizon_));
    }
    ++t_;
    const Vector phi_t = sensing_row(sensing_seed(), t_, k_);
    for (std::size_t i = 0; i < k_; ++i) {
      counters_[i].update(t_, phi_t[i] * value);
    }
  }

  // v*_t: noisy running sums of each projected coordinate.
  Vector noisy_sums() const {
    Vector v(k_);
    for (std::size_t i = 0; i < k_; ++i) v[i] = counters_[i].prefix_sum();
    return v;
  }

  // Noise radius for v*_t at the current time.
  double theta() const {
    if (!params_.noise || t_ == 0) return 0.0;
    return summed_laplace_radius(k_, TreeCounter::noise_terms(t_),
                                 counters_.front().segment_scale(),
                                 params_.delta_conf);
  }

  // D*_t from the current state. Pure; does not advance time.
  Vector reconstruct() const {
    if (t_ == 0) throw std::logic_error("CmcoEngine: nothing observed yet");
    const SparseBasis basis = build_basis(basis_, t_);
    const SensingMatrix phi(sensing_seed(), k_, basis.padded_n);
    const DenseMatrix a = compose(phi, basis);
    const Vector v = noisy_sums();
    const std::size_t s = std::min({sparsity_, basis.padded_n, k_});
    const RecoveryResult rec = cosamp(
        RecoveryProblem{.a = a, .y_star = v, .sparsity = s, .theta = theta()});
    return inverse(basis, rec.x_star);
  }

  nlohmann::json to_json() const {
    nlohmann::json counters = nlohmann::json::array();
    for (const TreeCounter& c : counters_) counters.push_back(c.to_json());
    return {{"horizon", horizon_},
            {"t", t_},
            {"k", k_},
            {"sparsity", sparsity_},
            {"basis", std::string(to_string(basis_))},
            {"sensing_seed", sensing_seed()},
            {"counters", counters}};
  }

  std::vector<std::byte> serialize() const {
    std::vector<std::byte> out;
    for (std::uint64_t v :
         {horizon_, t_, static_cast<std::uint64_t>(k_),
          static_cast<std::uint64_t>(sparsity_),
          static_cast<std::uint64_t>(basis_), sensing_seed()}) {
      const auto* p = reinterpret_cast<const std::byte*>(&v);
      out.insert(out.end(), p, p + sizeof(v));
    }
    for (const TreeCounter& c : counters_) {
      const auto blob = c.serialize();
      out.insert(out.end(), blob.begin(), blob.end());
    }
    return out;
  }

 private:
  std::uint64_t horizon_;
  std::size_t sparsity_;
  BasisKind basis_;
  PrivacyParams params_;
  std::uint64_t seed_;
  std::size_t k_ = 0;
  std::uint64_t t_ = 0;
  std::vector<TreeCounter> counters_;
};

// Observes D[t] and returns D*_t.
inline Vector cmco_step(CmcoEngine& engine, double value) {
  engine.observe(value);
  return engine.reconstruct();
}

// Baseline: one sensitivity-1 tree counter on the raw stream, per-time values
// recovered by differencing consecutive noisy prefix sums. The retained
// prefix sums are released outputs, not raw data.
class DifferencingEngine {
 public:
  DifferencingEngine(std::uint64_t horizon, double epsilon, std::uint64_t seed,
                     bool noise = true)
      : counter_(horizon, epsilon, 1.0, stream_seed(seed, SeedStream::kNoise),
                 noise),
        horizon_(horizon) {}

  std::uint64_t horizon() const { return horizon_; }
  std::uint64_t time() const { return counter_.time(); }

  void observe(double value) {
    if (counter_.time() + 1 > horizon_) {
      throw std::invalid_argument(
          "DifferencingEngine: stream longer than horizon " +
          std::to_string(horizon_));
    }
    prefix_.push_back(counter_.update(value));
  }

  const Vector& noisy_prefix_sums() const { return prefix_; }

  Vector reconstruct() const {
    Vector out(prefix_.size());
    for (std::size_t i = 0; i < prefix_.size(); ++i) {
      out[i] = i == 0 ? prefix_[0] : prefix_[i] - prefix_[i - 1];
    }
    return out;
  }

 private:
  TreeCounter counter_;
  std::uint64_t horizon_;
  Vector prefix_;
};

inline Vector differencing_step(DifferencingEngine& engine, double value) {
  engine.observe(value);
  return engine.reconstruct();
}

}  // namespace cmech
