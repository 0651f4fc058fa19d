#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "ecsim/forward_model.hpp"

namespace ecsim {

/// Additive white Gaussian measurement noise, entrywise std sigma_n.
/// All draws derive from the 64-bit seed, so a fixed (matrix, noise
/// model) pair reproduces bit-identical output.
struct NoiseModel {
  double sigma_n = 0.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws config_error if sigma_n < 0
};

/// Sylvester Hadamard matrix of order M (M a power of two), entries +-1
/// with H^T H = M I exactly in integer arithmetic.
Eigen::MatrixXi hadamard(int m);

/// N x M matrix of iid N(0, stddev^2) entries, drawn in column-major
/// order from the given engine.
Eigen::MatrixXd gaussian_matrix(int rows, int cols, double stddev, std::mt19937_64& eng);

/// Standard acquisition: A_meas = A0 + W, W entrywise N(0, sigma_n^2).
ResponseMatrix acquire_standard(const ResponseMatrix& a0, const NoiseModel& noise);

/// Hadamard acquisition: every experiment fires all M sources with +-1
/// coding, the recorded B = A0 H^T + W (W entrywise N(0, sigma_n^2)) is
/// unmixed by (1/M) B H.  Since H^T H = M I this equals
/// A_meas = A0 + (1/M) W H, whose noise is iid N(0, sigma_n^2 / M):
/// the factor-M Hadamard advantage.  Requires M to be a power of two.
ResponseMatrix acquire_hadamard(const ResponseMatrix& a0, const NoiseModel& noise);

}  // namespace ecsim
