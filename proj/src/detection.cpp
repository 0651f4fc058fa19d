#include "ecsim/detection.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "ecsim/acquisition.hpp"
#include "ecsim/errors.hpp"
#include "ecsim/rng.hpp"

namespace ecsim {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Eigen::VectorXd singular_values_fast(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  Eigen::VectorXd sv = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return sv.reverse();  // eigenvalues come ascending
}

double ratio_statistic(const Eigen::VectorXd& singular_values, int m, double gamma) {
  if (m < 5 || singular_values.size() != m)
    throw std::invalid_argument("ratio_statistic: need the full descending list of M >= 5 values");
  const double edge = 1.0 + 1.0 / std::sqrt(gamma);
  const double dof = m - 3.0 * edge * edge;
  if (!(dof > 0.0))
    throw std::invalid_argument("ratio_statistic: M - 3 (1+gamma^{-1/2})^2 must be positive");
  double sum = 0.0;
  for (int j = 3; j < m; ++j) sum += singular_values(j) * singular_values(j);
  if (sum <= 0.0)
    throw numerical_error(
        "ratio_statistic: truncated spectrum is zero (noiseless rank-3 input is degenerate)");
  return singular_values(0) / std::sqrt(sum / dof);
}

double threshold(double delta, int m, double gamma, const TracyWidomTable& tw) {
  const double inv_sqrt_gamma = 1.0 / std::sqrt(gamma);
  const double scale = inv_sqrt_gamma * std::cbrt(1.0 + inv_sqrt_gamma) /
                       (2.0 * std::pow(static_cast<double>(m), 2.0 / 3.0));
  return 1.0 + inv_sqrt_gamma + scale * tw.quantile(1.0 - delta);
}

DetectionOutcome detect(const Eigen::VectorXd& singular_values, int m, double gamma,
                        double delta, const TracyWidomTable& tw) {
  DetectionOutcome out;
  out.delta = delta;
  out.sigma1_measured = singular_values.size() ? singular_values(0) : 0.0;
  out.ratio = ratio_statistic(singular_values, m, gamma);
  out.r_delta = threshold(delta, m, gamma, tw);
  out.decision = out.ratio > out.r_delta;
  return out;
}

double pod_theoretical(double sigma1_a0, double sigma_n, double gamma, int m, double delta,
                       const TracyWidomTable& tw) {
  const SpikedPrediction pred = spiked_prediction(sigma1_a0, sigma_n, gamma);
  if (pred.regime == SpikedPrediction::Regime::Subcritical || !(pred.beta_spike > 0.0))
    return delta;
  const double r_delta = threshold(delta, m, gamma, tw);
  const double arg = std::sqrt(static_cast<double>(m)) *
                     (sigma1_a0 * pred.alpha_spike / sigma_n - std::sqrt(gamma) * r_delta) /
                     std::sqrt(pred.beta_spike);
  return std::max(normal_cdf(arg), delta);
}

namespace {

template <bool kParallel>
PodEstimate pod_mc(const ResponseMatrix& a0, double sigma_n, double delta, int trials,
                   std::uint64_t master_seed, const TracyWidomTable& tw) {
  if (trials < 1) throw std::invalid_argument("pod_empirical: need at least one trial");
  const int n = a0.rows();
  const int m = a0.cols();
  const double gamma = static_cast<double>(n) / m;
  const double r_delta = threshold(delta, m, gamma, tw);
  const double entry_std = sigma_n / std::sqrt(static_cast<double>(m));

  std::vector<unsigned char> alarm(trials, 0);
#pragma omp parallel for if (kParallel) schedule(dynamic)
  for (int t = 0; t < trials; ++t) {
    auto eng = make_stream(master_seed, static_cast<std::uint64_t>(t));
    const Eigen::MatrixXd meas = a0.matrix() + gaussian_matrix(n, m, entry_std, eng);
    const double r = ratio_statistic(singular_values_fast(meas), m, gamma);
    alarm[t] = r > r_delta ? 1 : 0;
  }

  int hits = 0;
  for (unsigned char a : alarm) hits += a;
  PodEstimate est;
  est.trials = trials;
  est.pod_hat = static_cast<double>(hits) / trials;
  est.std_error = std::sqrt(est.pod_hat * (1.0 - est.pod_hat) / trials);
  return est;
}

}  // namespace

PodEstimate pod_empirical(const ResponseMatrix& a0, double sigma_n, double delta, int trials,
                          std::uint64_t master_seed, const TracyWidomTable& tw) {
  return pod_mc<true>(a0, sigma_n, delta, trials, master_seed, tw);
}

PodEstimate pod_empirical_serial(const ResponseMatrix& a0, double sigma_n, double delta,
                                 int trials, std::uint64_t master_seed,
                                 const TracyWidomTable& tw) {
  return pod_mc<false>(a0, sigma_n, delta, trials, master_seed, tw);
}

}  // namespace ecsim
