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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cmech/cmech.hpp"

namespace cmech {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double Median(std::vector<double> v) { return median_of(std::move(v)); }

// Least-squares slope of log2(y) against log2(x).
double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log2(x[i]);
    my += std::log2(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log2(x[i]) - mx;
    sxy += dx * (std::log2(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// Budget violations summed over every bench run in this binary.
std::size_t g_budget_violations = 0;
std::size_t g_bench_runs = 0;

BenchResult Bench(const ExperimentConfig& cfg) {
  const BenchResult r = run_bench(cfg);
  g_budget_violations += r.budget_violations;
  ++g_bench_runs;
  return r;
}

// Median error per (mechanism, epsilon, n) from the summary rows.
double SummaryMedian(const BenchResult& r, BenchMechanism m, double eps,
                     std::size_t n) {
  for (const BenchRow& s : r.summary_rows) {
    if (s.trial == "median" && s.mechanism == m && s.epsilon == eps &&
        s.n == n) {
      return s.l2_error;
    }
  }
  throw InternalError("missing summary row");
}

ExperimentConfig SparseHaarConfig(std::size_t n, std::size_t s) {
  ExperimentConfig cfg;
  cfg.basis = BasisKind::kHaar;
  cfg.synth = {.kind = SynthKind::kExactSparse,
               .n = n,
               .sparsity = s,
               .amplitude = 1000.0,
               .basis = BasisKind::kHaar};
  cfg.sparsity = s;
  cfg.seed = 2024;
  cfg.workers = 0;
  return cfg;
}

Outcome NoiselessRecovery() {
  const auto start = Clock::now();
  const std::size_t n = 256, s = 8;
  const std::size_t k = plan_measurements(s, n, 4.0).k;
  if (k != 160) return {false, Fmt("planned k=%zu, expected 160", k)};
  const SparseBasis basis = build_basis(BasisKind::kHaar, n);
  int recovered = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const Vector x = synth_coefficients(
        {.kind = SynthKind::kExactSparse, .n = n, .sparsity = s}, trial);
    const SensingMatrix phi = sample_matrix(derive_seed(7, {trial}), k, n);
    const Vector y = phi.apply(inverse(basis, x));
    const DenseMatrix a = compose(phi, basis);
    const RecoveryResult rec =
        cosamp({.a = a, .y_star = y, .sparsity = s, .theta = 0.0});
    recovered += l2_error(x, rec.x_star) / norm2(x) < 1e-6;
  }
  const double secs = Seconds(start);
  return {recovered >= 99 && secs < 30.0,
          Fmt("%d/100 recovered (need >= 99), %.2f s (need < 30 s)", recovered,
              secs)};
}

Outcome LaplaceCalibration() {
  const std::size_t n = 4096;
  const Vector d(n, 0.0);
  double sum = 0.0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    sum += l2_error(d, laplacian_baseline(d, 0.1, t).d_star);
  }
  const double mean = sum / 200.0;
  const double target = std::sqrt(2.0 * n) / 0.1;
  return {std::abs(mean - target) <= 0.1 * target,
          Fmt("mean error %.1f vs %.1f (+-10%%)", mean, target)};
}

Outcome CmBeatsLmAtSmallEpsilon() {
  ExperimentConfig cfg = SparseHaarConfig(4096, 16);
  cfg.mechanisms = {BenchMechanism::kCm, BenchMechanism::kLm};
  cfg.epsilons = {1.0, 0.01, 0.001};
  cfg.trials = 50;
  const BenchResult r = Bench(cfg);
  bool pass = true;
  std::string detail;
  for (double eps : cfg.epsilons) {
    const double cm = SummaryMedian(r, BenchMechanism::kCm, eps, 4096);
    const double lm = SummaryMedian(r, BenchMechanism::kLm, eps, 4096);
    if (eps < 1.0) pass = pass && cm < lm;
    detail += Fmt("eps=%g cm=%.1f lm=%.1f%s; ", eps, cm, lm,
                  eps < 1.0 ? "" : " (not asserted)");
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome ScalingSeparation() {
  std::vector<double> ns, cm, lm;
  for (std::size_t n = 1024; n <= 16384; n *= 2) {
    ExperimentConfig cfg = SparseHaarConfig(n, 16);
    cfg.mechanisms = {BenchMechanism::kCm, BenchMechanism::kLm};
    cfg.epsilons = {0.01};
    cfg.trials = 25;
    const BenchResult r = Bench(cfg);
    ns.push_back(static_cast<double>(n));
    cm.push_back(SummaryMedian(r, BenchMechanism::kCm, 0.01, n));
    lm.push_back(SummaryMedian(r, BenchMechanism::kLm, 0.01, n));
  }
  // Doubling ratio: 2^slope of the log-log fit across all five sizes.
  const double lm_ratio = std::exp2(LogLogSlope(ns, lm));
  const double cm_ratio = std::exp2(LogLogSlope(ns, cm));
  return {lm_ratio >= 1.3 && lm_ratio <= 1.55 && cm_ratio <= 1.25,
          Fmt("LM doubling ratio %.3f (need [1.3, 1.55]), CM %.3f "
              "(need <= 1.25)",
              lm_ratio, cm_ratio)};
}

Outcome PrivateSparsitySelection() {
  const std::size_t n = 256;
  PrivacyParams params;
  params.epsilon = 1.0;
  params.select_fraction = 0.1;
  const BudgetSplit split = budget_split(params);
  const SynthSpec spec{.kind = SynthKind::kExactSparse,
                       .n = n,
                       .sparsity = 8,
                       .amplitude = 1000.0};
  const Vector x = synth_coefficients(spec, 99);
  const Vector d = inverse(build_basis(BasisKind::kHaar, n), x);

  // Oracle first: utility of every S from the known coefficients, with the
  // best S-term tail found by repeatedly removing the largest magnitude.
  std::vector<double> oracle(n + 1, 0.0);
  std::vector<double> mags;
  for (double v : x) mags.push_back(std::abs(v));
  double tail = 0.0;
  for (double m : mags) tail += m;
  for (std::size_t s = 1; s <= n; ++s) {
    const auto it = std::max_element(mags.begin(), mags.end());
    tail -= *it;
    *it = -1.0;
    const double k = std::min<double>(
        n, std::ceil(4.0 * s * std::max(std::log2(double(n) / s), 1.0)));
    oracle[s] = std::max(tail, 0.0) / std::sqrt(double(s)) + k / split.release;
  }
  const double best = *std::min_element(oracle.begin() + 1, oracle.end());
  const auto cands = sparsity_candidates(n);
  const auto u =
      utility_profile(d, BasisKind::kHaar, cands, split.release, params);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (std::abs(u[i] - oracle[cands[i]]) > 1e-6 * (1.0 + oracle[cands[i]])) {
      return {false, Fmt("utility mismatch at S=%zu: %g vs oracle %g", cands[i],
                         u[i], oracle[cands[i]])};
    }
  }

  int near_optimal = 0;
  for (std::uint64_t run = 0; run < 1000; ++run) {
    Rng rng = make_rng(stream_seed(run, SeedStream::kSelect));
    const std::size_t s = choose_sparsity(d, BasisKind::kHaar, split.select,
                                          split.release, params, rng);
    near_optimal += oracle[s] <= 1.1 * best;
  }
  return {near_optimal >= 950,
          Fmt("%d/1000 runs in the 1.1x min-utility set (need >= 950)",
              near_optimal)};
}

Outcome TreeCounterAccuracy() {
  const std::uint64_t horizon = 1024;
  std::vector<double> errors;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    TreeCounter counter(horizon, 1.0, 1.0, derive_seed(31, {trial}));
    double truth = 0.0;
    for (std::uint64_t t = 1; t <= horizon; ++t) {
      const double v = static_cast<double>((t * 7 + trial) % 5);
      truth += v;
      errors.push_back(std::abs(counter.update(t, v) - truth));
    }
  }
  std::sort(errors.begin(), errors.end());
  const double p99 = errors[errors.size() * 99 / 100];
  const double bound = 15.0 * std::pow(std::log2(1024.0), 1.5);

  TreeCounter exact(horizon, 1.0, 1.0, 0, /*noise=*/false);
  double truth = 0.0;
  bool noise_off_exact = true;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    truth += 0.25 * static_cast<double>(t % 9);
    noise_off_exact =
        noise_off_exact && exact.update(t, 0.25 * double(t % 9)) == truth;
  }
  return {p99 <= bound && noise_off_exact,
          Fmt("p99 error %.1f (need <= %.1f), noise-off exact: %s", p99, bound,
              noise_off_exact ? "yes" : "no")};
}

Outcome CmcoVersusDifferencing() {
  const auto start = Clock::now();
  ExperimentConfig cfg = SparseHaarConfig(256, 8);
  cfg.mechanisms = {BenchMechanism::kCmco, BenchMechanism::kContm};
  cfg.epsilons = {0.1};
  cfg.trials = 30;
  cfg.report_every = 32;
  const BenchResult r = Bench(cfg);
  const double secs = Seconds(start);
  auto med = [&](BenchMechanism m, std::size_t t) {
    return SummaryMedian(r, m, 0.1, t);
  };
  const double diff_ratio =
      med(BenchMechanism::kContm, 256) / med(BenchMechanism::kContm, 64);
  const double cmco_ratio =
      med(BenchMechanism::kCmco, 256) / med(BenchMechanism::kCmco, 64);
  bool dominates = true;
  for (std::size_t t = 32; t <= 256; t += 32) {
    dominates = dominates &&
                med(BenchMechanism::kCmco, t) < med(BenchMechanism::kContm, t);
  }
  const bool pass = diff_ratio >= 1.6 && diff_ratio <= 2.4 &&
                    cmco_ratio <= 1.5 && dominates && secs < 300.0;
  return {pass,
          Fmt("differencing ratio %.2f (need [1.6, 2.4]), CMCO ratio %.2f "
              "(need <= 1.5), CMCO below differencing at every t >= 32: %s, "
              "%.1f s (need < 300 s)",
              diff_ratio, cmco_ratio, dominates ? "yes" : "no", secs)};
}

Outcome PrivacySmoke() {
  const int samples = 1'000'000;
  const double width = 0.5, lo = -4.0, hi = 5.0;
  const int bins = static_cast<int>((hi - lo) / width);
  std::vector<double> c0(bins, 0.0), c1(bins, 0.0);
  Rng rng0 = make_rng(100), rng1 = make_rng(101);
  for (int i = 0; i < samples; ++i) {
    const double a = laplacian_mechanism(Vector{0.0}, 1.0, 1.0, rng0)[0];
    const double b = laplacian_mechanism(Vector{1.0}, 1.0, 1.0, rng1)[0];
    if (a >= lo && a < hi) c0[static_cast<int>((a - lo) / width)] += 1;
    if (b >= lo && b < hi) c1[static_cast<int>((b - lo) / width)] += 1;
  }
  int bad_bins = 0;
  double worst = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double sigma = std::sqrt(1.0 / c0[b] + 1.0 / c1[b]);
    const double ratio = std::max(c0[b] / c1[b], c1[b] / c0[b]);
    worst = std::max(worst, ratio);
    bad_bins += ratio > std::exp(1.0) * (1.0 + 3.0 * sigma);
  }

  // A private run with S chosen privately also goes through the ledger.
  ExperimentConfig cfg = SparseHaarConfig(256, 8);
  cfg.mechanisms = {BenchMechanism::kCm, BenchMechanism::kLm};
  cfg.sparsity.reset();
  cfg.private_run = true;
  cfg.epsilons = {1.0, 0.1};
  cfg.trials = 20;
  std::size_t thrown = 0;
  try {
    Bench(cfg);
  } catch (const BudgetExceeded&) {
    ++thrown;
  }
  const std::size_t violations = g_budget_violations + thrown;
  return {bad_bins == 0 && violations == 0,
          Fmt("worst bin ratio %.3f, %d bins over e(1+3 sigma); %zu budget "
              "violations across %zu bench runs",
              worst, bad_bins, violations, g_bench_runs)};
}

Outcome Determinism() {
  ExperimentConfig cfg = SparseHaarConfig(128, 4);
  cfg.mechanisms = {BenchMechanism::kCm, BenchMechanism::kLm,
                    BenchMechanism::kCmco, BenchMechanism::kContm};
  cfg.epsilons = {1.0, 0.01};
  cfg.trials = 4;
  cfg.seed = 77;
  const std::string a = to_csv(Bench(cfg), cfg.basis);
  cfg.workers = 1;
  const std::string b = to_csv(Bench(cfg), cfg.basis);
  cfg.sparsity.reset();
  cfg.mechanisms = {BenchMechanism::kCm};
  const std::string c1 = to_csv(Bench(cfg), cfg.basis);
  const std::string c2 = to_csv(Bench(cfg), cfg.basis);
  const bool pass = a == b && c1 == c2;
  return {pass, Fmt("fixed-S CSV %zu bytes identical: %s; private-S CSV "
                    "identical: %s",
                    a.size(), a == b ? "yes" : "no", c1 == c2 ? "yes" : "no")};
}

Outcome Complexity() {
  std::vector<double> ns, ms;
  const PrivacyParams params;
  std::string detail;
  for (std::size_t n = 1024; n <= 16384; n *= 2) {
    std::vector<double> times;
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
      const Vector d = synth({.kind = SynthKind::kExactSparse,
                              .n = n,
                              .sparsity = 16,
                              .amplitude = 1000.0},
                             trial);
      const auto start = Clock::now();
      compressive_mechanism(d, BasisKind::kHaar, 16, 1.0, params, trial);
      times.push_back(Seconds(start) * 1000.0);
    }
    ns.push_back(static_cast<double>(n));
    ms.push_back(Median(times));
    detail += Fmt("n=%zu %.1f ms; ", n, ms.back());
  }
  detail.resize(detail.size() - 2);
  const double slope = LogLogSlope(ns, ms);
  return {slope <= 1.4,
          Fmt("log-log slope %.3f (need <= 1.4): %s", slope, detail.c_str())};
}

}  // namespace
}  // namespace cmech

int main() {
  using cmech::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria =
      {
          {"noiseless sparse recovery", cmech::NoiselessRecovery},
          {"laplacian baseline calibration", cmech::LaplaceCalibration},
          {"cm beats lm at small epsilon", cmech::CmBeatsLmAtSmallEpsilon},
          {"scaling separation", cmech::ScalingSeparation},
          {"private sparsity selection", cmech::PrivateSparsitySelection},
          {"tree counter accuracy", cmech::TreeCounterAccuracy},
          {"cmco versus differencing", cmech::CmcoVersusDifferencing},
          {"privacy smoke tests", cmech::PrivacySmoke},
          {"determinism", cmech::Determinism},
          {"complexity sanity", cmech::Complexity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
