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

// Command-line front end.
//
//   cmech synth     --n 256 --synth-S 8 --R 1000 > data.txt
//   cmech transform --input data.txt [--inverse]
//   cmech release   cm|lm --input data.txt --epsilon 0.5 [--S 8]
//   cmech choose-s  --input data.txt --epsilon 1
//   cmech stream    cmco|contm --T 256 --S 8 --report-every 32 < data.txt
//   cmech bench     --config bench.cfg
//
// Settings come from an optional flat key=value file (--config); flags
// override the file. Without a seed one is drawn from entropy and printed.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cmech/cmech.hpp"

namespace {

using cmech::ExperimentConfig;

// Settings gathered from --config plus flags, applied in that order.
struct Settings {
  std::string config_path;
  std::map<std::string, std::string> flags;
  std::string input;  // "-" or empty means stdin
  std::string output;

  void bind(CLI::App* app, const std::string& flag, const std::string& key,
            const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { flags[key] = v; }, help);
  }

  // Keys set by either source are recorded in `seen` when given.
  ExperimentConfig resolve(std::set<std::string>* seen = nullptr) const {
    ExperimentConfig cfg;
    std::set<std::string> keys;
    if (!config_path.empty()) {
      for (const auto& [k, v] : cmech::read_config_file(config_path)) {
        cmech::apply_setting(cfg, k, v);
        keys.insert(k);
      }
    }
    for (const auto& [k, v] : flags) {
      cmech::apply_setting(cfg, k, v);
      keys.insert(k);
    }
    if (keys.count("seed") == 0) {
      cfg.seed = cmech::entropy_seed();
      std::cerr << "seed=" << cfg.seed << "\n";
    }
    if (seen != nullptr) *seen = std::move(keys);
    return cfg;
  }
};

void add_common(CLI::App* app, Settings& s) {
  app->add_option("--config", s.config_path, "key=value config file");
  s.bind(app, "--seed", "seed", "64-bit seed (default: entropy, printed)");
  s.bind(app, "--epsilon", "epsilon", "privacy budget (bench: comma grid)");
  s.bind(app, "--basis", "basis", "haar | cosine | identity");
  s.bind(app, "--S", "S", "sparsity (omit for private selection)");
  s.bind(app, "--select-fraction", "select_fraction",
         "share of epsilon spent choosing S");
  s.bind(app, "--delta-conf", "delta_conf", "confidence for the noise radius");
  s.bind(app, "--C", "C", "measurement oversampling constant");
  s.bind(app, "--C2", "C2", "utility tail constant");
  s.bind(app, "--C3", "C3", "recovery noise constant");
  s.bind(app, "--C4", "C4", "utility measurement constant");
  s.bind(app, "--C5", "C5", "utility sensitivity constant");
  s.bind(app, "--noise", "noise", "on | off (off is a test hook)");
  s.bind(app, "--format", "format", "lines | csv:<column>");
  s.bind(app, "--output", "output", "output path (default stdout)");
}

void add_synth_flags(CLI::App* app, Settings& s) {
  s.bind(app, "--n", "n", "dimension");
  s.bind(app, "--kind", "synth", "exact-sparse | compressible");
  s.bind(app, "--synth-S", "synth_S", "nonzeros for exact-sparse data");
  s.bind(app, "--p", "p", "compressibility exponent in (0,1)");
  s.bind(app, "--R", "R", "coefficient magnitude");
}

cmech::Vector read_input(const Settings& s, const ExperimentConfig& cfg) {
  if (s.input.empty() || s.input == "-") {
    return cmech::ingest(std::cin, cfg.format, "stdin");
  }
  return cmech::ingest(s.input, cfg.format);
}

class Output {
 public:
  explicit Output(const std::optional<std::string>& path) {
    if (path && *path != "-") {
      file_ = std::make_unique<std::ofstream>(*path);
      if (!*file_) throw std::runtime_error("cannot write '" + *path + "'");
    }
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_vector(std::ostream& out, const cmech::Vector& v) {
  for (double x : v) out << cmech::format_number(x) << "\n";
}

cmech::PrivacyParams params_from(const ExperimentConfig& cfg) {
  cmech::PrivacyParams p = cfg.params;
  p.epsilon = cfg.epsilons.front();
  p.validate();
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Differentially private dataset release via compressive "
      "sensing"};
  app.require_subcommand(1);

  Settings synth_s, transform_s, release_s, choose_s, stream_s, bench_s;

  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic data");
  add_common(synth_cmd, synth_s);
  add_synth_flags(synth_cmd, synth_s);

  auto* transform_cmd =
      app.add_subcommand("transform", "apply a basis transform");
  add_common(transform_cmd, transform_s);
  transform_cmd->add_option("--input", transform_s.input, "input file");
  bool inverse_flag = false;
  transform_cmd->add_flag("--inverse", inverse_flag,
                          "treat input as coefficients and synthesize");

  auto* release_cmd = app.add_subcommand("release", "release a dataset");
  add_common(release_cmd, release_s);
  std::string release_mech;
  release_cmd->add_option("mechanism", release_mech, "cm | lm")
      ->required()
      ->check(CLI::IsMember({"cm", "lm"}));
  release_cmd->add_option("--input", release_s.input, "input file");
  bool report_error = false;
  release_cmd->add_flag("--report-error", report_error,
                        "print ||D - D*||_2 to stderr (not private)");

  auto* choose_cmd =
      app.add_subcommand("choose-s", "privately choose the sparsity S");
  add_common(choose_cmd, choose_s);
  choose_cmd->add_option("--input", choose_s.input, "input file");
  bool show_table = false;
  choose_cmd->add_flag("--table", show_table,
                       "print utility and selection probability per S "
                       "(not private)");

  auto* stream_cmd =
      app.add_subcommand("stream", "pan-private continual release");
  add_common(stream_cmd, stream_s);
  std::string stream_mech;
  stream_cmd->add_option("mechanism", stream_mech, "cmco | contm")
      ->required()
      ->check(CLI::IsMember({"cmco", "contm"}));
  stream_cmd->add_option("--input", stream_s.input, "input file");
  stream_s.bind(stream_cmd, "--T", "n", "horizon");
  stream_s.bind(stream_cmd, "--report-every", "report_every",
                "emit D*_t every m steps (default T/8)");

  auto* bench_cmd = app.add_subcommand("bench", "run the benchmark harness");
  add_common(bench_cmd, bench_s);
  add_synth_flags(bench_cmd, bench_s);
  bench_s.bind(bench_cmd, "--mechanisms", "mechanisms", "cm,lm,cmco,contm");
  bench_s.bind(bench_cmd, "--trials", "trials", "trials per epsilon");
  bench_s.bind(bench_cmd, "--data", "data", "data file (default synthetic)");
  bench_s.bind(bench_cmd, "--report-every", "report_every",
               "streaming report cadence");
  bench_s.bind(bench_cmd, "--workers", "workers", "worker threads");
  bool private_flag = false;
  bool timing_flag = false;
  bench_cmd->add_flag("--private", private_flag,
                      "refuse test hooks that disable noise");
  bench_cmd->add_flag("--timing", timing_flag, "record wall-clock ms");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      const ExperimentConfig cfg = synth_s.resolve();
      Output out(cfg.output_path);
      write_vector(out.get(), cmech::synth(cfg.synth, cfg.seed));
    } else if (transform_cmd->parsed()) {
      transform_s.flags.emplace("seed", "0");  // transforms are deterministic
      const ExperimentConfig cfg = transform_s.resolve();
      const cmech::Vector in = read_input(transform_s, cfg);
      Output out(cfg.output_path);
      if (inverse_flag) {
        // Coefficient count is padded_n; synthesize at that length.
        const auto basis = cmech::build_basis(cfg.basis, in.size());
        if (basis.padded_n != in.size()) {
          throw std::invalid_argument(
              "inverse haar input length must be a power of two");
        }
        write_vector(out.get(), cmech::inverse(basis, in));
      } else {
        write_vector(
            out.get(),
            cmech::forward(cmech::build_basis(cfg.basis, in.size()), in));
      }
    } else if (release_cmd->parsed()) {
      const ExperimentConfig cfg = release_s.resolve();
      const cmech::PrivacyParams params = params_from(cfg);
      const cmech::Vector d = read_input(release_s, cfg);
      cmech::BudgetLedger ledger(params.epsilon);
      cmech::ReleaseRecord rec =
          release_mech == "lm"
              ? cmech::laplacian_baseline(d, params.epsilon, cfg.seed,
                                          params.noise, &ledger)
              : cmech::private_compressive_release(d, cfg.basis, cfg.sparsity,
                                                   params, cfg.seed, ledger);
      Output out(cfg.output_path);
      write_vector(out.get(), rec.d_star);
      std::cerr << "mechanism=" << cmech::to_string(rec.mechanism)
                << " epsilon_spent=" << rec.epsilon_spent;
      if (rec.mechanism == cmech::MechanismKind::kCompressive) {
        std::cerr << " S=" << rec.s_used << " k=" << rec.k_used
                  << " iterations=" << rec.iterations
                  << " halted_by=" << cmech::to_string(rec.halted_by);
      }
      std::cerr << " seed=" << rec.seed << "\n";
      if (report_error) {
        std::cerr << "l2_error=" << cmech::l2_error(d, rec.d_star) << "\n";
      }
    } else if (choose_cmd->parsed()) {
      const ExperimentConfig cfg = choose_s.resolve();
      const cmech::PrivacyParams params = params_from(cfg);
      const cmech::Vector d = read_input(choose_s, cfg);
      const cmech::BudgetSplit split = cmech::budget_split(params);
      cmech::BudgetLedger ledger(params.epsilon);
      cmech::Rng rng = cmech::make_rng(
          cmech::stream_seed(cfg.seed, cmech::SeedStream::kSelect));
      const std::size_t s = cmech::choose_sparsity(
          d, cfg.basis, split.select, split.release, params, rng, &ledger);
      Output out(cfg.output_path);
      out.get() << s << "\n";
      if (show_table) {
        const auto cands = cmech::sparsity_candidates(d.size());
        const auto u =
            cmech::utility_profile(d, cfg.basis, cands, split.release, params);
        const auto p = cmech::sparsity_selection_probabilities(
            d, cfg.basis, split.select, split.release, params);
        std::cerr << "S,utility,probability\n";
        for (std::size_t i = 0; i < cands.size(); ++i) {
          std::cerr << cands[i] << "," << cmech::format_number(u[i]) << ","
                    << cmech::format_number(p[i]) << "\n";
        }
      }
    } else if (stream_cmd->parsed()) {
      std::set<std::string> seen;
      const ExperimentConfig cfg = stream_s.resolve(&seen);
      const cmech::PrivacyParams params = params_from(cfg);
      const cmech::Vector d = read_input(stream_s, cfg);
      const bool horizon_set = seen.count("n") != 0 || seen.count("T") != 0;
      const std::uint64_t horizon = horizon_set ? cfg.synth.n : d.size();
      if (d.size() > horizon) {
        throw std::invalid_argument(
            "stream has " + std::to_string(d.size()) +
            " values, longer than T=" + std::to_string(horizon));
      }
      const auto times =
          cmech::detail::report_times(d.size(), cfg.report_every);
      Output out(cfg.output_path);
      auto emit = [&](std::uint64_t t, const cmech::Vector& est) {
        out.get() << t;
        for (double v : est) out.get() << "," << cmech::format_number(v);
        out.get() << "\n";
      };
      std::size_t next = 0;
      if (stream_mech == "cmco") {
        if (!cfg.sparsity) throw cmech::ConfigError("cmco requires --S");
        cmech::CmcoEngine engine(horizon, *cfg.sparsity, cfg.basis, params,
                                 cfg.seed);
        for (std::size_t t = 1; t <= d.size(); ++t) {
          engine.observe(d[t - 1]);
          if (next < times.size() && times[next] == t) {
            ++next;
            emit(t, engine.reconstruct());
          }
        }
      } else {
        cmech::DifferencingEngine engine(horizon, params.epsilon, cfg.seed,
                                         params.noise);
        for (std::size_t t = 1; t <= d.size(); ++t) {
          engine.observe(d[t - 1]);
          if (next < times.size() && times[next] == t) {
            ++next;
            emit(t, engine.reconstruct());
          }
        }
      }
    } else if (bench_cmd->parsed()) {
      if (private_flag) bench_s.flags["private"] = "true";
      if (timing_flag) bench_s.flags["timing"] = "true";
      const ExperimentConfig cfg = bench_s.resolve();
      const cmech::BenchResult result = cmech::run_bench(cfg);
      Output out(cfg.output_path);
      out.get() << cmech::to_csv(result, cfg.basis);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
