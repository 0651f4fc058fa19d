#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ecsim/config.hpp"
#include "ecsim/detection.hpp"
#include "ecsim/imaging.hpp"

namespace ecsim {

/// Files written by a runner plus a machine-readable summary.
struct RunResult {
  std::vector<std::string> files;
  nlohmann::json summary;
};

/// Applies the configured acquisition (standard or Hadamard) to a0.
ResponseMatrix acquire_configured(const ScenarioConfig& cfg, const ResponseMatrix& a0,
                                  double sigma_n, std::uint64_t seed);

/// A0 CSV plus its singular-value CSV.
RunResult run_synthesize(const ScenarioConfig& cfg);

/// One noisy acquisition of A0 under the configured mode.
RunResult run_acquire(const ScenarioConfig& cfg);

/// Full detection pipeline; summary carries the JSON record
/// {R, r_delta, decision, sigma1, delta, M, N}.
RunResult run_detect(const ScenarioConfig& cfg);

/// MUSIC scan; optional (axis, plane) cross-section extractions.
RunResult run_music(const ScenarioConfig& cfg,
                    const std::vector<std::pair<int, double>>& slices = {});

/// Strength fit from a measured-matrix CSV and a located center.
RunResult run_characterize(const ScenarioConfig& cfg, const std::string& matrix_csv,
                           const Vec3& z_hat, const std::string& mtable_path = "",
                           const std::string& estimates_csv = "",
                           const std::vector<double>& sigma_grid = {},
                           const std::vector<double>& alpha_grid = {});

/// CSV (ratio, pod_theoretical, pod_empirical, stderr) over the ratio grid.
RunResult run_pod_curve(const ScenarioConfig& cfg, const std::vector<double>& ratios);

/// Writes the TW1 table CSV (default <out>/tw1_table.csv).
RunResult run_tw_table(const ScenarioConfig& cfg, const std::string& path = "");

/// Singular-value spectrum of A0 and the noiseless z=0 MUSIC section.
RunResult run_figure_6_1(const ScenarioConfig& cfg);

/// Per ratio: one noisy acquisition, z=0 and x=0 MUSIC sections.
RunResult run_figure_6_2(const ScenarioConfig& cfg, const std::vector<double>& ratios);

/// Per delta: CSV (ratio, pod_empirical, stderr, pod_theoretical).
RunResult run_figure_6_3(const ScenarioConfig& cfg, const std::vector<double>& deltas,
                         const std::vector<double>& ratio_grid, int trials);

std::vector<double> default_fig6_2_ratios();
std::vector<double> default_fig6_3_deltas();
std::vector<double> default_fig6_3_ratio_grid();

/// Monte Carlo R samples (one per trial) under noise with entry variance
/// sigma_n^2 / M added to a0; shared by the POD runners so one sweep can
/// serve several FAR levels.
std::vector<double> ratio_statistic_samples(const ResponseMatrix& a0, double sigma_n,
                                            int trials, std::uint64_t master_seed);

}  // namespace ecsim
