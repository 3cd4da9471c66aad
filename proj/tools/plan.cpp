// SPDX-License-Identifier: Apache-2.0
//
// plan: command-line front end for the IRS placement experiments.
// Exit codes: 0 ok, 1 usage or configuration error, 2 infeasible
// instance, 3 numeric failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "thzirs/experiment.hpp"
#include "thzirs/parallel.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInfeasible = 2;
constexpr int kNumeric = 3;

// "a..b" or a single seed
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const auto v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const std::string a = text.substr(0, dots);
    const std::string b = text.substr(dots + 2);
    const auto lo = std::stoull(a, &used);
    if (used != a.size()) throw std::invalid_argument(text);
    const auto hi = std::stoull(b, &used);
    if (used != b.size() || hi < lo) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (const std::exception&) {
    throw thz::ConfigError("--seeds expects a..b with a <= b, got '" + text + "'");
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw thz::ConfigError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  thz::apply_thread_cap_from_env();

  CLI::App app{"IRS-assisted THz placement, phase and sub-band planner"};
  app.require_subcommand(1);
  std::string config_path;

  auto* sweep = app.add_subcommand("absorption-sweep", "absorption coefficient and path gain over 200-400 GHz");
  std::string sweep_out;
  sweep->add_option("--config", config_path, "JSON configuration")->required();
  sweep->add_option("--out", sweep_out, "CSV output file")->required();

  auto* optimize = app.add_subcommand("optimize", "solve one instance and print the solution as JSON");
  std::string algo_name = "bcs";
  std::uint64_t seed = 1;
  std::optional<std::size_t> ues;
  optimize->add_option("--config", config_path, "JSON configuration")->required();
  optimize->add_option("--algo", algo_name, "bcs | minidis | ranloc | ranphi");
  optimize->add_option("--seed", seed, "seed for UE positions and random baselines");
  optimize->add_option("--ues", ues, "number of UEs (default: first configured count)");

  auto* mc = app.add_subcommand("monte-carlo", "seeded comparison of all configured schemes");
  std::string seeds_text;
  std::string out_dir;
  bool no_timing = false;
  mc->add_option("--config", config_path, "JSON configuration")->required();
  mc->add_option("--seeds", seeds_text, "seed range a..b (default: from config)");
  mc->add_option("--out", out_dir, "output directory")->required();
  mc->add_flag("--no-timing", no_timing, "leave wallclock_s empty so reruns are byte-identical");
  bool quiet = false;
  mc->add_flag("-q,--quiet", quiet, "no per-run progress on stderr");

  auto* plan = app.add_subcommand("band-plan", "print the resolved sub-band plan as CSV");
  plan->add_option("--config", config_path, "JSON configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    thz::ExperimentConfig config = thz::load_config(config_path);

    if (*sweep) {
      auto out = open_output(sweep_out);
      thz::write_absorption_sweep(config, out);
      return out ? kOk : kUsage;
    }

    if (*plan) {
      const thz::Medium medium = config.medium();
      std::cout << "index,center_hz,bandwidth_hz,lower_hz,upper_hz,K_center_per_m\n";
      const auto bands = thz::build_band_plan(config);
      for (std::size_t i = 0; i < bands.size(); ++i) {
        const auto& b = bands[i];
        std::printf("%zu,%.1f,%.1f,%.1f,%.1f,%.9e\n", i, b.center_hz, b.bandwidth_hz, b.center_hz - 0.5 * b.bandwidth_hz,
                    b.center_hz + 0.5 * b.bandwidth_hz, medium.absorption(b.center_hz));
      }
      return kOk;
    }

    if (*optimize) {
      const auto algo = thz::parse_algorithm(algo_name);
      const std::size_t count = ues.value_or(config.ue_counts.front());
      if (count == 0) throw thz::ConfigError("--ues must be >= 1");
      const auto bands = thz::build_band_plan(config);
      const auto instance = thz::make_instance(config, bands, seed, count);
      const auto solution = thz::run_algorithm(config, instance, algo, seed);
      const std::string problem = thz::check_solution(instance, solution);
      if (!problem.empty()) {
        std::cerr << "plan: invalid solution: " << problem << '\n';
        return kNumeric;
      }
      std::cout << thz::solution_json(instance, solution, algo, seed) << '\n';
      return solution.feasible ? kOk : kInfeasible;
    }

    if (*mc) {
      if (!seeds_text.empty()) {
        const auto [lo, hi] = parse_seed_range(seeds_text);
        config.first_seed = lo;
        config.seed_count = static_cast<std::size_t>(hi - lo + 1);
      }
      if (no_timing) config.record_wallclock = false;
      const std::filesystem::path dir(out_dir);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw thz::ConfigError("cannot create '" + dir.string() + "': " + ec.message());

      const auto report = thz::run_experiment(config, thz::ExecPolicy::Parallel, quiet ? nullptr : &std::cerr);
      auto summary = open_output(dir / "summary.csv");
      thz::write_summary_csv(report, config.record_wallclock, summary);
      auto aggregate = open_output(dir / "aggregate.csv");
      thz::write_aggregate_csv(report, aggregate);
      auto json = open_output(dir / "report.json");
      thz::write_report_json(config, report, json);

      std::size_t failed = 0;
      for (const auto& r : report.records) failed += r.error.empty() ? 0 : 1;
      if (failed) {
        std::cerr << "plan: " << failed << " run(s) failed numerically; see report.json\n";
        return kNumeric;
      }
      return kOk;
    }
  } catch (const thz::ConfigError& e) {
    std::cerr << "plan: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "plan: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "plan: numeric failure: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}
