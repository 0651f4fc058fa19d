#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "ecsim/forward_model.hpp"
#include "ecsim/random_matrix.hpp"
#include "ecsim/tracy_widom.hpp"

namespace ecsim {

struct DetectionOutcome {
  double ratio = 0.0;            // R
  double r_delta = 0.0;          // threshold
  bool decision = false;         // R > r_delta (strict; ties are "no alarm")
  double delta = 0.0;            // FAR level
  double sigma1_measured = 0.0;  // top singular value of the data
};

/// Ratio of the top singular value to the truncated bulk level:
///   R = sigma_1 / sqrt( sum_{j>=4} sigma_j^2 / (M - 3 (1+gamma^{-1/2})^2) ).
/// Throws numerical_error when the truncated sum vanishes (noiseless
/// rank-3 input).  Requires the full descending list of M >= 5 values.
double ratio_statistic(const Eigen::VectorXd& singular_values, int m, double gamma);

/// Neyman-Pearson threshold at false-alarm rate delta:
///   r_delta = 1 + gamma^{-1/2}
///           + gamma^{-1/2} (1+gamma^{-1/2})^{1/3} / (2 M^{2/3}) * Qtw(1-delta).
double threshold(double delta, int m, double gamma, const TracyWidomTable& tw);

/// Decision record for a measured spectrum.
DetectionOutcome detect(const Eigen::VectorXd& singular_values, int m, double gamma,
                        double delta, const TracyWidomTable& tw);

/// Theoretical probability of detection,
///   POD = max{ Phi( sqrt(M) (sigma1_a0 alpha / sigma_n - gamma^{1/2} r_delta)
///                   / beta^{1/2} ), delta },
/// equal to delta exactly in the subcritical regime.
double pod_theoretical(double sigma1_a0, double sigma_n, double gamma, int m, double delta,
                       const TracyWidomTable& tw);

struct PodEstimate {
  double pod_hat = 0.0;
  double std_error = 0.0;  // binomial
  int trials = 0;
};

/// Monte Carlo POD: adds per-trial white noise with entry variance
/// sigma_n^2 / M (the Hadamard-acquired data model all the detection
/// statistics assume) and counts R > r_delta.  Trials use independent
/// derived RNG streams, so the parallel and serial versions agree
/// bit-for-bit and results do not depend on thread scheduling.
PodEstimate pod_empirical(const ResponseMatrix& a0, double sigma_n, double delta, int trials,
                          std::uint64_t master_seed, const TracyWidomTable& tw);
PodEstimate pod_empirical_serial(const ResponseMatrix& a0, double sigma_n, double delta,
                                 int trials, std::uint64_t master_seed,
                                 const TracyWidomTable& tw);

/// All singular values via the eigendecomposition of A^T A: ~3x faster
/// than a full SVD and accurate to ~sqrt(eps)*sigma_1 absolute, which is
/// ample for the Theta(sigma_n) spectra the detection statistics see.
Eigen::VectorXd singular_values_fast(const Eigen::MatrixXd& a);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace ecsim
