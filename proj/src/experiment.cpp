#include "ecsim/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ecsim/characterization.hpp"
#include "ecsim/csv.hpp"
#include "ecsim/errors.hpp"
#include "ecsim/rng.hpp"
#include "ecsim/version.hpp"

namespace ecsim {

namespace fs = std::filesystem;

namespace {

OutputMeta meta_for(const ScenarioConfig& cfg) { return {cfg.hash(), cfg.seed}; }

std::string out_path(const ScenarioConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t s = master;
  (void)splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (salt + 1);
  return splitmix64(s);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw numerical_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

nlohmann::json json_meta(const ScenarioConfig& cfg) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(cfg.hash()));
  return {{"tool_version", kVersion}, {"config_hash", hash}, {"seed", cfg.seed}};
}

nlohmann::json json_point(const Vec3& p) {
  return nlohmann::json::array({p.x(), p.y(), p.z()});
}

TracyWidomTable tw_for(const ScenarioConfig& cfg) {
  return tw1_table_cached(out_path(cfg, "tw1_table.csv"));
}

std::string trim_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::vector<std::vector<double>> slice_rows(const MusicImage& image, int axis, double plane) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : image_slice(image, axis, plane))
    rows.push_back({r[0], r[1], r[2]});
  return rows;
}

const char* kSliceAxisName[3] = {"x", "y", "z"};

}  // namespace

ResponseMatrix acquire_configured(const ScenarioConfig& cfg, const ResponseMatrix& a0,
                                  double sigma_n, std::uint64_t seed) {
  const NoiseModel noise{sigma_n, seed};
  return cfg.acquisition == AcquisitionMode::Hadamard ? acquire_hadamard(a0, noise)
                                                      : acquire_standard(a0, noise);
}

RunResult run_synthesize(const ScenarioConfig& cfg) {
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  RunResult result;
  const std::string matrix_path = out_path(cfg, "a0.csv");
  write_matrix_csv(matrix_path, a0.matrix(), meta_for(cfg));
  result.files.push_back(matrix_path);

  const Eigen::VectorXd& sv = a0.singular_values();
  std::vector<std::vector<double>> rows;
  for (Eigen::Index j = 0; j < sv.size(); ++j)
    rows.push_back({static_cast<double>(j + 1), sv(j),
                    sv(j) > 0.0 ? std::log10(sv(j)) : -std::numeric_limits<double>::infinity()});
  const std::string sv_path = out_path(cfg, "a0_singular_values.csv");
  write_table_csv(sv_path, meta_for(cfg), {"index", "value", "log10_value"}, rows);
  result.files.push_back(sv_path);

  result.summary = {{"meta", json_meta(cfg)},
                    {"rank", significant_rank(sv)},
                    {"sigma1", sv(0)}};
  return result;
}

RunResult run_acquire(const ScenarioConfig& cfg) {
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const double sigma_n = cfg.resolve_sigma_n(a0.singular_values()(0));
  const ResponseMatrix meas = acquire_configured(cfg, a0, sigma_n, cfg.seed);
  RunResult result;
  const std::string path = out_path(cfg, "a_meas.csv");
  write_matrix_csv(path, meas.matrix(), meta_for(cfg));
  result.files.push_back(path);
  result.summary = {{"meta", json_meta(cfg)}, {"sigma_n", sigma_n}};
  return result;
}

RunResult run_detect(const ScenarioConfig& cfg) {
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const double sigma_n = cfg.resolve_sigma_n(a0.singular_values()(0));
  const ResponseMatrix meas = acquire_configured(cfg, a0, sigma_n, cfg.seed);
  const TracyWidomTable tw = tw_for(cfg);
  const DetectionOutcome out = detect(meas.singular_values(), meas.cols(),
                                      cfg.array.gamma(), cfg.delta, tw);
  RunResult result;
  result.summary = {{"R", out.ratio},
                    {"r_delta", out.r_delta},
                    {"decision", out.decision},
                    {"sigma1", out.sigma1_measured},
                    {"delta", out.delta},
                    {"M", meas.cols()},
                    {"N", meas.rows()},
                    {"meta", json_meta(cfg)}};
  const std::string path = out_path(cfg, "detect.json");
  write_json(path, result.summary);
  result.files.push_back(path);
  return result;
}

RunResult run_music(const ScenarioConfig& cfg, const std::vector<std::pair<int, double>>& slices) {
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const double sigma_n = cfg.resolve_sigma_n(a0.singular_values()(0));
  const ResponseMatrix meas = acquire_configured(cfg, a0, sigma_n, cfg.seed);
  const SignalProjector projector = signal_projector(meas, cfg.music_rank);
  const MusicImage image = music_scan(cfg.grid, projector, cfg.array.receivers);

  RunResult result;
  std::vector<std::vector<double>> rows;
  rows.reserve(image.values.size());
  for (int i = 0; i < cfg.grid.num_nodes(); ++i) {
    const Vec3 p = cfg.grid.node(i);
    rows.push_back({p.x(), p.y(), p.z(), image.values[i]});
  }
  const std::string image_path = out_path(cfg, "music_image.csv");
  write_table_csv(image_path, meta_for(cfg), {"x", "y", "z", "value"}, rows);
  result.files.push_back(image_path);

  for (const auto& [axis, plane] : slices) {
    const std::string name =
        std::string("music_slice_") + kSliceAxisName[axis] + trim_number(plane) + ".csv";
    const std::string path = out_path(cfg, name);
    std::vector<std::string> cols;
    for (int a = 0; a < 3; ++a)
      if (a != axis) cols.push_back(kSliceAxisName[a]);
    cols.push_back("value");
    write_table_csv(path, meta_for(cfg), cols, slice_rows(image, axis, plane));
    result.files.push_back(path);
  }

  result.summary = {{"argmax", json_point(locate(image))},
                    {"refined_argmax", json_point(locate_refined(image))},
                    {"peak_value", image.peak_value()},
                    {"peak_to_median", peak_to_median(image)},
                    {"rank_deficient", projector.rank_deficient},
                    {"meta", json_meta(cfg)}};
  const std::string summary_path = out_path(cfg, "music_summary.json");
  write_json(summary_path, result.summary);
  result.files.push_back(summary_path);
  return result;
}

RunResult run_characterize(const ScenarioConfig& cfg, const std::string& matrix_csv,
                           const Vec3& z_hat, const std::string& mtable_path,
                           const std::string& estimates_csv,
                           const std::vector<double>& sigma_grid,
                           const std::vector<double>& alpha_grid) {
  const ResponseMatrix meas(read_matrix_csv(matrix_csv));
  const StrengthEstimate est = fit_strength(meas, z_hat, cfg.array);

  RunResult result;
  result.summary = {{"c_hat", est.c_hat},
                    {"residual", est.residual_norm},
                    {"n_obs", est.n_obs},
                    {"meta", json_meta(cfg)}};

  if (!estimates_csv.empty()) {
    if (mtable_path.empty())
      throw config_error("multi-frequency fit needs a polarization table (--mtable)");
    std::ifstream in(estimates_csv);
    if (!in) throw config_error("cannot open estimates CSV " + estimates_csv);
    std::vector<std::pair<double, double>> omega_chat;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("omega", 0) == 0) continue;
      std::istringstream row(line);
      double omega, c;
      char comma;
      if (!(row >> omega >> comma >> c))
        throw config_error(estimates_csv + ": malformed estimate row: " + line);
      omega_chat.emplace_back(omega, c);
    }
    const MaterialFit fit = multi_frequency_fit(omega_chat, MTable::load_csv(mtable_path),
                                                cfg.inclusion.mu0, sigma_grid, alpha_grid);
    result.summary["sigma_hat"] = fit.sigma_hat;
    result.summary["alpha_hat"] = fit.alpha_hat;
    result.summary["fit_objective"] = fit.objective;
  }

  const std::string path = out_path(cfg, "characterize.json");
  write_json(path, result.summary);
  result.files.push_back(path);
  return result;
}

std::vector<double> ratio_statistic_samples(const ResponseMatrix& a0, double sigma_n,
                                            int trials, std::uint64_t master_seed) {
  const int n = a0.rows();
  const int m = a0.cols();
  const double gamma = static_cast<double>(n) / m;
  const double entry_std = sigma_n / std::sqrt(static_cast<double>(m));
  std::vector<double> samples(trials);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trials; ++t) {
    auto eng = make_stream(master_seed, static_cast<std::uint64_t>(t));
    const Eigen::MatrixXd meas = a0.matrix() + gaussian_matrix(n, m, entry_std, eng);
    samples[t] = ratio_statistic(singular_values_fast(meas), m, gamma);
  }
  return samples;
}

RunResult run_pod_curve(const ScenarioConfig& cfg, const std::vector<double>& ratios) {
  if (ratios.empty()) throw config_error("pod-curve needs at least one ratio");
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const double sigma1 = a0.singular_values()(0);
  const double gamma = cfg.array.gamma();
  const int m = a0.cols();
  const TracyWidomTable tw = tw_for(cfg);
  const double r_delta = threshold(cfg.delta, m, gamma, tw);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double sigma_n = sigma1 / ratios[i];
    const auto samples =
        ratio_statistic_samples(a0, sigma_n, cfg.trials, derive_seed(cfg.seed, i));
    int hits = 0;
    for (double r : samples) hits += r > r_delta ? 1 : 0;
    const double pod_hat = static_cast<double>(hits) / samples.size();
    const double se = std::sqrt(pod_hat * (1.0 - pod_hat) / samples.size());
    const double pod_th = pod_theoretical(sigma1, sigma_n, gamma, m, cfg.delta, tw);
    rows.push_back({ratios[i], pod_th, pod_hat, se});
  }

  RunResult result;
  const std::string path = out_path(cfg, "pod_curve.csv");
  write_table_csv(path, meta_for(cfg),
                  {"ratio", "pod_theoretical", "pod_empirical", "stderr"}, rows);
  result.files.push_back(path);
  result.summary = {{"meta", json_meta(cfg)}, {"delta", cfg.delta}, {"trials", cfg.trials}};
  return result;
}

RunResult run_tw_table(const ScenarioConfig& cfg, const std::string& path) {
  const std::string target = path.empty() ? out_path(cfg, "tw1_table.csv") : path;
  const TracyWidomTable table = tw1_build_table();
  table.save_csv(target);
  RunResult result;
  result.files.push_back(target);
  result.summary = {{"meta", json_meta(cfg)},
                    {"mean", table.mean()},
                    {"variance", table.variance()},
                    {"rows", table.grid().size()}};
  return result;
}

RunResult run_figure_6_1(const ScenarioConfig& cfg) {
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  RunResult result;

  const Eigen::VectorXd& sv = a0.singular_values();
  std::vector<std::vector<double>> rows;
  for (Eigen::Index j = 0; j < sv.size(); ++j)
    rows.push_back({static_cast<double>(j + 1), sv(j),
                    sv(j) > 0.0 ? std::log10(sv(j)) : -std::numeric_limits<double>::infinity()});
  const std::string sv_path = out_path(cfg, "fig6_1_singular_values.csv");
  write_table_csv(sv_path, meta_for(cfg), {"index", "value", "log10_value"}, rows);
  result.files.push_back(sv_path);

  const SignalProjector projector = signal_projector(a0, cfg.music_rank);
  const MusicImage image = music_scan(cfg.grid, projector, cfg.array.receivers);
  const std::string slice_path = out_path(cfg, "fig6_1_music_z0.csv");
  write_table_csv(slice_path, meta_for(cfg), {"x", "y", "value"}, slice_rows(image, 2, 0.0));
  result.files.push_back(slice_path);

  result.summary = {{"meta", json_meta(cfg)},
                    {"rank", significant_rank(sv)},
                    {"argmax", json_point(locate(image))},
                    {"peak_to_median", peak_to_median(image)}};
  return result;
}

RunResult run_figure_6_2(const ScenarioConfig& cfg, const std::vector<double>& ratios) {
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const double sigma1 = a0.singular_values()(0);
  RunResult result;
  result.summary = {{"meta", json_meta(cfg)}, {"ratios", ratios}};
  nlohmann::json peaks = nlohmann::json::array();

  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double sigma_n = sigma1 / ratios[i];
    const ResponseMatrix meas =
        acquire_configured(cfg, a0, sigma_n, derive_seed(cfg.seed, i));
    const SignalProjector projector = signal_projector(meas, cfg.music_rank);
    const MusicImage image = music_scan(cfg.grid, projector, cfg.array.receivers);

    const std::string tag = "fig6_2_ratio" + trim_number(ratios[i]);
    const std::string z_path = out_path(cfg, tag + "_z0.csv");
    write_table_csv(z_path, meta_for(cfg), {"x", "y", "value"}, slice_rows(image, 2, 0.0));
    result.files.push_back(z_path);
    const std::string x_path = out_path(cfg, tag + "_x0.csv");
    write_table_csv(x_path, meta_for(cfg), {"y", "z", "value"}, slice_rows(image, 0, 0.0));
    result.files.push_back(x_path);

    peaks.push_back({{"ratio", ratios[i]},
                     {"argmax", json_point(locate(image))},
                     {"peak_to_median", peak_to_median(image)}});
  }
  result.summary["images"] = peaks;
  return result;
}

RunResult run_figure_6_3(const ScenarioConfig& cfg, const std::vector<double>& deltas,
                         const std::vector<double>& ratio_grid, int trials) {
  if (trials < 100) throw config_error("fig6-3 needs at least 100 trials per grid point");
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const double sigma1 = a0.singular_values()(0);
  const double gamma = cfg.array.gamma();
  const int m = a0.cols();
  const TracyWidomTable tw = tw_for(cfg);

  // One R sweep per ratio serves every FAR level.
  std::vector<std::vector<double>> samples(ratio_grid.size());
  for (std::size_t i = 0; i < ratio_grid.size(); ++i)
    samples[i] =
        ratio_statistic_samples(a0, sigma1 / ratio_grid[i], trials, derive_seed(cfg.seed, i));

  RunResult result;
  result.summary = {{"meta", json_meta(cfg)}, {"deltas", deltas}, {"trials", trials}};
  for (double delta : deltas) {
    const double r_delta = threshold(delta, m, gamma, tw);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ratio_grid.size(); ++i) {
      int hits = 0;
      for (double r : samples[i]) hits += r > r_delta ? 1 : 0;
      const double pod_hat = static_cast<double>(hits) / trials;
      const double se = std::sqrt(pod_hat * (1.0 - pod_hat) / trials);
      const double pod_th =
          pod_theoretical(sigma1, sigma1 / ratio_grid[i], gamma, m, delta, tw);
      rows.push_back({ratio_grid[i], pod_hat, se, pod_th});
    }
    const std::string path = out_path(cfg, "fig6_3_delta" + trim_number(delta) + ".csv");
    write_table_csv(path, meta_for(cfg),
                    {"ratio", "pod_empirical", "stderr", "pod_theoretical"}, rows);
    result.files.push_back(path);
  }
  return result;
}

std::vector<double> default_fig6_2_ratios() { return {10.0, 20.0, 30.0}; }

std::vector<double> default_fig6_3_deltas() { return {0.01, 0.05, 0.10}; }

std::vector<double> default_fig6_3_ratio_grid() {
  return {0.8, 0.9, 1.0, 1.05, 1.1, 1.15, 1.2, 1.25, 1.3, 1.4, 1.5, 1.75, 2.0};
}

}  // namespace ecsim
