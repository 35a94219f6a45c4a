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

// Experiment harness: runs mechanisms over an epsilon grid and emits CSV.
//
// Per-trial rows use the schema in kBenchHeader. Summary rows follow, one
// "median" and one "mean" row per (mechanism, epsilon, n) group, with the
// statistic in the l2_error and wall_ms columns.
//
// Output is a deterministic function of the config: every trial derives its
// own seed from (seed, mechanism, epsilon index, trial), workers fill
// pre-assigned slots, and wall_ms is written as 0 unless timing is enabled.

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "cmech/bases.hpp"
#include "cmech/continual.hpp"
#include "cmech/data.hpp"
#include "cmech/errors.hpp"
#include "cmech/mechanism.hpp"
#include "cmech/privacy.hpp"
#include "cmech/random.hpp"

namespace cmech {

inline constexpr std::string_view kBenchHeader =
    "mechanism,basis,n,S,k,epsilon,trial,seed,l2_error,wall_ms";

enum class BenchMechanism { kCm, kLm, kCmco, kContm };

inline std::string_view to_string(BenchMechanism m) {
  switch (m) {
    case BenchMechanism::kCm:
      return "cm";
    case BenchMechanism::kLm:
      return "lm";
    case BenchMechanism::kCmco:
      return "cmco";
    case BenchMechanism::kContm:
      return "contm";
  }
  return "unknown";
}

inline BenchMechanism parse_bench_mechanism(std::string_view s) {
  if (s == "cm") return BenchMechanism::kCm;
  if (s == "lm") return BenchMechanism::kLm;
  if (s == "cmco") return BenchMechanism::kCmco;
  if (s == "contm") return BenchMechanism::kContm;
  throw ConfigError("unknown mechanism '" + std::string(s) +
                    "' (expected cm|lm|cmco|contm)");
}

inline bool is_streaming(BenchMechanism m) {
  return m == BenchMechanism::kCmco || m == BenchMechanism::kContm;
}

struct ExperimentConfig {
  std::vector<BenchMechanism> mechanisms{BenchMechanism::kCm,
                                         BenchMechanism::kLm};
  BasisKind basis = BasisKind::kHaar;
  std::optional<std::size_t> sparsity;  // absent: private selection (cm)
  std::vector<double> epsilons{1.0, 0.1, 0.01, 0.001, 0.00001};
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  // Data source: a file when data_path is set, otherwise synth.
  std::optional<std::string> data_path;
  InputFormat format;
  SynthSpec synth;
  PrivacyParams params;          // params.epsilon is ignored; the grid is used
  std::size_t report_every = 0;  // streaming report cadence, 0 = T/8
  bool private_run = false;
  bool timing = false;
  std::size_t workers = 0;  // 0 = hardware concurrency
  std::optional<std::string> output_path;
};

namespace detail {

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("bad value '" + std::string(v) + "' for " +
                      std::string(key));
  }
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean '" + std::string(v) + "' for " +
                    std::string(key));
}

inline std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(trim(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace detail

// Applies one key=value setting. Unknown keys are errors.
inline void apply_setting(ExperimentConfig& cfg, std::string_view key,
                          std::string_view value) {
  using detail::parse_number;
  key = detail::trim(key);
  value = detail::trim(value);
  try {
    if (key == "mechanisms" || key == "mechanism") {
      cfg.mechanisms.clear();
      for (auto m : detail::split_list(value)) {
        cfg.mechanisms.push_back(parse_bench_mechanism(m));
      }
    } else if (key == "basis") {
      cfg.basis = parse_basis_kind(value);
      cfg.synth.basis = cfg.basis;
    } else if (key == "n" || key == "T") {
      cfg.synth.n = parse_number<std::size_t>(key, value);
    } else if (key == "S") {
      if (value.empty() || value == "auto") {
        cfg.sparsity.reset();
      } else {
        cfg.sparsity = parse_number<std::size_t>(key, value);
      }
    } else if (key == "epsilon") {
      cfg.epsilons.clear();
      for (auto e : detail::split_list(value)) {
        cfg.epsilons.push_back(parse_number<double>(key, e));
      }
    } else if (key == "trials") {
      cfg.trials = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "data") {
      cfg.data_path = std::string(value);
    } else if (key == "format") {
      cfg.format = parse_input_format(value);
    } else if (key == "synth") {
      cfg.synth.kind = parse_synth_kind(value);
    } else if (key == "synth_S") {
      cfg.synth.sparsity = parse_number<std::size_t>(key, value);
    } else if (key == "p") {
      cfg.synth.p = parse_number<double>(key, value);
    } else if (key == "R") {
      cfg.synth.amplitude = parse_number<double>(key, value);
    } else if (key == "select_fraction") {
      cfg.params.select_fraction = parse_number<double>(key, value);
    } else if (key == "delta_conf") {
      cfg.params.delta_conf = parse_number<double>(key, value);
    } else if (key == "C") {
      cfg.params.c = parse_number<double>(key, value);
    } else if (key == "C2") {
      cfg.params.c2 = parse_number<double>(key, value);
    } else if (key == "C3") {
      cfg.params.c3 = parse_number<double>(key, value);
    } else if (key == "C4") {
      cfg.params.c4 = parse_number<double>(key, value);
    } else if (key == "C5") {
      cfg.params.c5 = parse_number<double>(key, value);
    } else if (key == "noise") {
      cfg.params.noise = detail::parse_bool(key, value);
    } else if (key == "report_every") {
      cfg.report_every = parse_number<std::size_t>(key, value);
    } else if (key == "private") {
      cfg.private_run = detail::parse_bool(key, value);
    } else if (key == "timing") {
      cfg.timing = detail::parse_bool(key, value);
    } else if (key == "workers") {
      cfg.workers = parse_number<std::size_t>(key, value);
    } else if (key == "output") {
      cfg.output_path = std::string(value);
    } else {
      throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

// Flat key=value text. '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    v = v.substr(0, v.find('#'));
    v = detail::trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key=value");
    }
    out.emplace_back(std::string(detail::trim(v.substr(0, eq))),
                     std::string(detail::trim(v.substr(eq + 1))));
  }
  return out;
}

// Rejects configs that cannot run, before any trial starts.
inline void validate(const ExperimentConfig& cfg) {
  if (cfg.trials == 0) throw ConfigError("trials must be >= 1");
  if (cfg.mechanisms.empty()) throw ConfigError("no mechanisms selected");
  if (cfg.epsilons.empty()) throw ConfigError("epsilon grid is empty");
  for (double e : cfg.epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw ConfigError("epsilon grid must be strictly positive");
    }
  }
  if (cfg.private_run && !cfg.params.noise) {
    throw ConfigError("refusing noise=off in a private run");
  }
  PrivacyParams p = cfg.params;
  p.epsilon = 1.0;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!cfg.data_path) {
    try {
      cfg.synth.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  for (BenchMechanism m : cfg.mechanisms) {
    if (is_streaming(m) && m == BenchMechanism::kCmco && !cfg.sparsity) {
      throw ConfigError("cmco requires an explicit S");
    }
    if (m == BenchMechanism::kCm && !cfg.sparsity &&
        cfg.params.select_fraction == 0.0) {
      throw ConfigError("cm without S needs select_fraction > 0");
    }
  }
}

struct BenchRow {
  BenchMechanism mechanism = BenchMechanism::kCm;
  std::size_t n = 0;
  std::optional<std::size_t> sparsity;
  std::optional<std::size_t> k;
  double epsilon = 0.0;
  std::string trial;  // index, or "median"/"mean" for summaries
  std::optional<std::uint64_t> seed;
  double l2_error = 0.0;
  double wall_ms = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> trial_rows;
  std::vector<BenchRow> summary_rows;
  std::size_t budget_violations = 0;
};

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

namespace detail {

inline std::vector<std::uint64_t> report_times(std::uint64_t horizon,
                                               std::size_t every) {
  const std::uint64_t step =
      every != 0 ? every : std::max<std::uint64_t>(horizon / 8, 1);
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = step; t <= horizon; t += step) out.push_back(t);
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

struct TrialTask {
  BenchMechanism mechanism;
  std::size_t mech_index;
  std::size_t eps_index;
  std::size_t trial;
};

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < count; i = next++) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = count;
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// Data for one trial: the file contents, or a synthetic vector regenerated
// per trial so that all mechanisms and epsilons in a trial see the same D.
inline Vector bench_data(const ExperimentConfig& cfg, std::size_t trial) {
  if (cfg.data_path) return ingest(*cfg.data_path, cfg.format);
  return synth(cfg.synth,
               derive_seed(stream_seed(cfg.seed, SeedStream::kData), {trial}));
}

inline BenchResult run_bench(const ExperimentConfig& cfg) {
  validate(cfg);
  std::optional<Vector> file_data;
  if (cfg.data_path) file_data = ingest(*cfg.data_path, cfg.format);

  std::vector<detail::TrialTask> tasks;
  for (std::size_t m = 0; m < cfg.mechanisms.size(); ++m) {
    for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        tasks.push_back({cfg.mechanisms[m], m, e, t});
      }
    }
  }

  std::vector<std::vector<BenchRow>> slots(tasks.size());
  std::atomic<std::size_t> violations{0};

  detail::parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    const detail::TrialTask& task = tasks[i];
    const Vector d = file_data ? *file_data : bench_data(cfg, task.trial);
    const double eps = cfg.epsilons[task.eps_index];
    const std::uint64_t trial_seed =
        derive_seed(cfg.seed, {static_cast<std::uint64_t>(task.mechanism),
                               task.eps_index, task.trial});
    PrivacyParams params = cfg.params;
    params.epsilon = eps;
    std::vector<BenchRow>& rows = slots[i];
    const auto start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
      if (!cfg.timing) return 0.0;
      return std::chrono::duration<double, std::milli>(
                 std::chrono::steady_clock::now() - start)
          .count();
    };
    auto base_row = [&] {
      BenchRow r;
      r.mechanism = task.mechanism;
      r.n = d.size();
      r.epsilon = eps;
      r.trial = std::to_string(task.trial);
      r.seed = trial_seed;
      return r;
    };

    try {
      switch (task.mechanism) {
        case BenchMechanism::kLm: {
          BudgetLedger ledger(eps);
          const ReleaseRecord rec =
              laplacian_baseline(d, eps, trial_seed, params.noise, &ledger);
          BenchRow r = base_row();
          r.l2_error = l2_error(d, rec.d_star);
          r.wall_ms = elapsed_ms();
          rows.push_back(r);
          break;
        }
        case BenchMechanism::kCm: {
          BudgetLedger ledger(eps);
          const ReleaseRecord rec = private_compressive_release(
              d, cfg.basis, cfg.sparsity, params, trial_seed, ledger);
          BenchRow r = base_row();
          r.sparsity = rec.s_used;
          r.k = rec.k_used;
          r.l2_error = l2_error(d, rec.d_star);
          r.wall_ms = elapsed_ms();
          rows.push_back(r);
          break;
        }
        case BenchMechanism::kCmco: {
          CmcoEngine engine(d.size(), *cfg.sparsity, cfg.basis, params,
                            trial_seed);
          const auto times = detail::report_times(d.size(), cfg.report_every);
          std::size_t next = 0;
          for (std::size_t t = 1; t <= d.size(); ++t) {
            engine.observe(d[t - 1]);
            if (next < times.size() && times[next] == t) {
              ++next;
              const Vector est = engine.reconstruct();
              BenchRow r = base_row();
              r.n = t;
              r.sparsity = engine.sparsity();
              r.k = engine.k();
              r.l2_error = l2_error(std::span(d).first(t), est);
              r.wall_ms = elapsed_ms();
              rows.push_back(r);
            }
          }
          break;
        }
        case BenchMechanism::kContm: {
          DifferencingEngine engine(d.size(), eps, trial_seed, params.noise);
          const auto times = detail::report_times(d.size(), cfg.report_every);
          std::size_t next = 0;
          for (std::size_t t = 1; t <= d.size(); ++t) {
            engine.observe(d[t - 1]);
            if (next < times.size() && times[next] == t) {
              ++next;
              BenchRow r = base_row();
              r.n = t;
              r.l2_error =
                  l2_error(std::span(d).first(t), engine.reconstruct());
              r.wall_ms = elapsed_ms();
              rows.push_back(r);
            }
          }
          break;
        }
      }
    } catch (const BudgetExceeded&) {
      ++violations;
      throw;
    }
  });

  BenchResult result;
  result.budget_violations = violations;
  for (auto& s : slots) {
    for (auto& r : s) result.trial_rows.push_back(std::move(r));
  }

  // Summaries per (mechanism, epsilon, n), in first-appearance order.
  using Key = std::tuple<std::size_t, std::size_t, std::size_t>;
  std::map<Key, std::vector<const BenchRow*>> groups;
  std::vector<Key> order;
  for (const BenchRow& r : result.trial_rows) {
    std::size_t mi = 0;
    while (cfg.mechanisms[mi] != r.mechanism) ++mi;
    std::size_t ei = 0;
    while (cfg.epsilons[ei] != r.epsilon) ++ei;
    const Key key{mi, ei, r.n};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  for (const Key& key : order) {
    const auto& rows = groups[key];
    std::vector<double> errs;
    std::vector<double> walls;
    for (const BenchRow* r : rows) {
      errs.push_back(r->l2_error);
      walls.push_back(r->wall_ms);
    }
    for (const char* stat : {"median", "mean"}) {
      BenchRow s = *rows.front();
      s.trial = stat;
      s.seed.reset();
      const bool med = std::string_view(stat) == "median";
      s.l2_error = med ? median_of(errs) : mean_of(errs);
      s.wall_ms = med ? median_of(walls) : mean_of(walls);
      result.summary_rows.push_back(s);
    }
  }
  return result;
}

inline std::string to_csv_line(const BenchRow& r, BasisKind basis) {
  auto opt = [](const auto& o) {
    return o ? std::to_string(*o) : std::string();
  };
  std::string line;
  line += to_string(r.mechanism);
  line += ',';
  line += r.mechanism == BenchMechanism::kLm ||
                  r.mechanism == BenchMechanism::kContm
              ? "none"
              : std::string(to_string(basis));
  line += ',' + std::to_string(r.n);
  line += ',' + opt(r.sparsity);
  line += ',' + opt(r.k);
  line += ',' + format_number(r.epsilon);
  line += ',' + r.trial;
  line += ',' + opt(r.seed);
  line += ',' + format_number(r.l2_error);
  line += ',' + format_number(r.wall_ms);
  return line;
}

inline std::string to_csv(const BenchResult& result, BasisKind basis) {
  std::string out(kBenchHeader);
  out += '\n';
  for (const BenchRow& r : result.trial_rows) {
    out += to_csv_line(r, basis) + '\n';
  }
  for (const BenchRow& r : result.summary_rows) {
    out += to_csv_line(r, basis) + '\n';
  }
  return out;
}

}  // namespace cmech
