#include "ecsim/acquisition.hpp"

#include <bit>

#include "ecsim/errors.hpp"
#include "ecsim/rng.hpp"

namespace ecsim {

void NoiseModel::validate() const {
  if (!(sigma_n >= 0.0)) throw config_error("noise level sigma_n must be >= 0");
}

Eigen::MatrixXi hadamard(int m) {
  if (m < 1 || !std::has_single_bit(static_cast<unsigned>(m)))
    throw config_error("Hadamard order " + std::to_string(m) +
                       " is not supported: the Sylvester construction needs a power of two");
  Eigen::MatrixXi h(m, m);
  // Sylvester matrix entry: (-1)^popcount(i & j).
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      h(i, j) = (std::popcount(static_cast<unsigned>(i & j)) & 1) ? -1 : 1;
  return h;
}

Eigen::MatrixXd gaussian_matrix(int rows, int cols, double stddev, std::mt19937_64& eng) {
  Eigen::MatrixXd w(rows, cols);
  GaussianSampler gauss;
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      w(i, j) = stddev * gauss(eng);
  return w;
}

ResponseMatrix acquire_standard(const ResponseMatrix& a0, const NoiseModel& noise) {
  noise.validate();
  auto eng = make_stream(noise.seed, 0);
  return ResponseMatrix(a0.matrix() +
                        gaussian_matrix(a0.rows(), a0.cols(), noise.sigma_n, eng));
}

ResponseMatrix acquire_hadamard(const ResponseMatrix& a0, const NoiseModel& noise) {
  noise.validate();
  const int m = a0.cols();
  const Eigen::MatrixXd h = hadamard(m).cast<double>();
  auto eng = make_stream(noise.seed, 0);
  const Eigen::MatrixXd w = gaussian_matrix(a0.rows(), m, noise.sigma_n, eng);
  // A0 H^T H / M recombines to A0 exactly, so only the unmixed noise
  // term needs computing; this also keeps sigma_n = 0 bit-exact.
  return ResponseMatrix(a0.matrix() + (w * h) / static_cast<double>(m));
}

}  // namespace ecsim
