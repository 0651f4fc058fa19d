#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ecsim/forward_model.hpp"

namespace ecsim {

/// One-parameter linear least-squares estimate of the inclusion strength
/// c = k alpha^5 Re(M) from a measured matrix and a located center.
struct StrengthEstimate {
  double c_hat = 0.0;
  double residual_norm = 0.0;
  int n_obs = 0;  // N * M
};

/// Unit-strength kernel matrix G[n,m] = (D^2G(r_n,z) q_n)^T (D^2G(z,s_m) p_m);
/// the response matrix is c * G with c = k alpha^5 Re(M).
Eigen::MatrixXd unit_kernel_matrix(const SensorArray& array, const Vec3& z);

/// c_hat = <G, A_meas>_F / ||G||_F^2, residual = ||A_meas - c_hat G||_F.
/// Throws numerical_error when ||G||_F = 0.
StrengthEstimate fit_strength(const ResponseMatrix& a_meas, const Vec3& z_hat,
                              const SensorArray& array);

/// Tabulated scalar polarization M(nu); CSV columns nu, re_m, im_m.
class MTable {
 public:
  static MTable load_csv(const std::string& path);
  static MTable from_rows(std::vector<std::pair<double, Complex>> rows);

  /// Linear interpolation; throws numerical_error outside [nu_min, nu_max].
  Complex at(double nu) const;

  double nu_min() const { return nu_.front(); }
  double nu_max() const { return nu_.back(); }

 private:
  std::vector<double> nu_;
  std::vector<Complex> m_;
};

struct MaterialFit {
  double sigma_hat = 0.0;  // conductivity [S/m]
  double alpha_hat = 0.0;  // radius [m]
  double objective = 0.0;  // sum of squared residuals at the minimizer
};

/// Grid search over (sigma, alpha) minimizing
///   sum_omega | c_hat(omega) - omega mu0 sigma alpha^5 Re M(omega mu0 sigma alpha^2) |^2.
/// Needs at least two distinct frequencies (a single one cannot separate
/// conductivity from size); throws numerical_error if the table does not
/// cover the nu range the grids require.
MaterialFit multi_frequency_fit(const std::vector<std::pair<double, double>>& omega_chat,
                                const MTable& mtable, double mu0,
                                const std::vector<double>& sigma_grid,
                                const std::vector<double>& alpha_grid);

}  // namespace ecsim
