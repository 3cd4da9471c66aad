// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: JSON configuration, sub-band planning, the
// absorption sweep and the seeded Monte-Carlo comparison of placement
// schemes with CSV / JSON output.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thzirs/bcs.hpp"

namespace thz {

/// Malformed or out-of-range configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { Bcs, MiniDis, RanLoc, RanPhi };

std::string algorithm_name(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);  // throws ConfigError

enum class BandPlanMode { Tile, Auto, Explicit };

struct BandPlanConfig {
  BandPlanMode mode = BandPlanMode::Tile;
  double start_hz = 200e9;
  double stop_hz = 400e9;
  double width_hz = 50e9;
  struct Entry {
    double center_hz = 0.0;
    double bandwidth_hz = 0.0;
  };
  std::vector<Entry> explicit_bands;
};

struct ExperimentConfig {
  Scene scene;  // ues filled only when positions are given explicitly
  double ue_height_m = 1.0;
  std::vector<std::size_t> ue_counts{1, 2, 3, 4};
  Atmosphere atmosphere;
  DetuningModel detuning = DetuningModel::Squared;
  double thermal_noise_dbm_per_hz = -174.0;
  double noise_figure_db = 10.0;
  BandPlanConfig band_plan;
  std::size_t element_count = 20;
  double spacing_m = 0.005;
  double p_max_w = 1.0;
  std::vector<double> rate_requirements_bps{1e9};  // one value for all UEs, or one per UE
  GridSpec grid;
  double sigma = 1e-3;
  int max_rounds = 30;
  std::uint64_t first_seed = 1;
  std::size_t seed_count = 100;
  std::vector<Algorithm> algorithms{Algorithm::Bcs, Algorithm::MiniDis, Algorithm::RanLoc, Algorithm::RanPhi};
  std::vector<double> sweep_distances_m{1.0, 5.0, 10.0};
  double sweep_step_hz = 0.5e9;
  bool record_wallclock = true;

  [[nodiscard]] bool explicit_ues() const { return !scene.ues.empty(); }
  [[nodiscard]] Medium medium() const { return Medium::from_atmosphere(atmosphere, detuning); }
  [[nodiscard]] double noise_psd_w_per_hz() const {
    return dbm_per_hz_to_w_per_hz(thermal_noise_dbm_per_hz + noise_figure_db);
  }
  [[nodiscard]] InnerOptions inner_options() const;
  void validate() const;  // throws ConfigError
};

ExperimentConfig parse_config(const std::string& text);  // JSON; empty text gives the defaults
ExperimentConfig load_config(const std::string& path);

/// Local maxima of K(f) on a 0.1 GHz raster over [start, stop].
std::vector<double> absorption_peaks(const Medium& medium, double start_hz, double stop_hz);

/// Greedy plan of non-overlapping bands inside the peak-free gaps, each
/// gap's bands shifted to minimise absorption at their centres. Falls back
/// to plain tiling when no gap is wide enough.
std::vector<SubBand> auto_band_plan(double start_hz, double stop_hz, double width_hz, const Medium& medium,
                                    double noise_psd_w_per_hz);

/// Contiguous bands of `width_hz` from `start_hz` while they fit.
std::vector<SubBand> tiled_band_plan(double start_hz, double stop_hz, double width_hz, double noise_psd_w_per_hz);

std::vector<SubBand> build_band_plan(const ExperimentConfig& config);

/// CSV: f_hz, K_per_m, gain_db_d1, ... for every configured distance.
void write_absorption_sweep(const ExperimentConfig& config, std::ostream& out);

/// UE positions for one seed; the first U of them form the U-UE instance.
std::vector<Vec3> draw_ue_positions(const ExperimentConfig& config, std::uint64_t seed, std::size_t count);

ProblemInstance make_instance(const ExperimentConfig& config, const std::vector<SubBand>& bands,
                              std::uint64_t seed, std::size_t ue_count);

/// Runs one scheme; `seed` and `ue_count` pick the random baselines' streams.
Solution run_algorithm(const ExperimentConfig& config, const ProblemInstance& instance, Algorithm algo,
                       std::uint64_t seed, ExecPolicy policy = ExecPolicy::Parallel);

/// Empty when the solution satisfies its constraints (or is flagged
/// infeasible); otherwise a description of the first violation.
std::string check_solution(const ProblemInstance& instance, const Solution& solution);

struct RunRecord {
  std::uint64_t seed = 0;
  Algorithm algo = Algorithm::Bcs;
  std::size_t ue_count = 0;
  Solution solution;
  double wallclock_s = 0.0;
  std::string error;  // numeric failure for this seed, if any
};

struct AggregateRow {
  Algorithm algo = Algorithm::Bcs;
  std::size_t ue_count = 0;
  std::size_t runs = 0;
  std::size_t feasible_runs = 0;
  double mean_sum_rate = 0.0;    // infeasible runs count as 0
  double stddev_sum_rate = 0.0;  // sample standard deviation
};

struct RunReport {
  std::vector<SubBand> bands;
  std::vector<RunRecord> records;  // seed-major, then U, then algorithm order
  std::vector<AggregateRow> aggregate;
};

RunReport run_experiment(const ExperimentConfig& config, ExecPolicy policy = ExecPolicy::Parallel,
                         std::ostream* log = nullptr);

std::vector<AggregateRow> aggregate_records(const std::vector<RunRecord>& records,
                                            const std::vector<Algorithm>& algorithms,
                                            const std::vector<std::size_t>& ue_counts);

void write_summary_csv(const RunReport& report, bool with_wallclock, std::ostream& out);
void write_aggregate_csv(const RunReport& report, std::ostream& out);
void write_report_json(const ExperimentConfig& config, const RunReport& report, std::ostream& out);

/// Solution as a JSON document (used by the single-instance command).
std::string solution_json(const ProblemInstance& instance, const Solution& solution, Algorithm algo,
                          std::uint64_t seed);

}  // namespace thz
