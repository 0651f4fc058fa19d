#include "ecsim/characterization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ecsim/errors.hpp"

namespace ecsim {

Eigen::MatrixXd unit_kernel_matrix(const SensorArray& array, const Vec3& z) {
  array.validate(z);
  const int n = array.num_receivers();
  const int m = array.num_sources();
  Eigen::MatrixXd source(m, 3), receiver(n, 3);
  for (int j = 0; j < m; ++j)
    source.row(j) =
        (green_hessian(z, array.sources[j].position) * array.sources[j].direction).transpose();
  for (int i = 0; i < n; ++i)
    receiver.row(i) =
        (green_hessian(array.receivers[i].position, z) * array.receivers[i].direction)
            .transpose();
  return receiver * source.transpose();
}

StrengthEstimate fit_strength(const ResponseMatrix& a_meas, const Vec3& z_hat,
                              const SensorArray& array) {
  const Eigen::MatrixXd g = unit_kernel_matrix(array, z_hat);
  const double gg = g.squaredNorm();
  if (!(gg > 0.0))
    throw numerical_error("fit_strength: unit kernel matrix vanishes for this geometry");
  StrengthEstimate est;
  est.c_hat = (g.array() * a_meas.matrix().array()).sum() / gg;
  est.residual_norm = (a_meas.matrix() - est.c_hat * g).norm();
  est.n_obs = static_cast<int>(a_meas.rows()) * static_cast<int>(a_meas.cols());
  return est;
}

MTable MTable::from_rows(std::vector<std::pair<double, Complex>> rows) {
  if (rows.empty()) throw numerical_error("polarization table has no rows");
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  MTable t;
  for (const auto& [nu, m] : rows) {
    t.nu_.push_back(nu);
    t.m_.push_back(m);
  }
  return t;
}

MTable MTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw numerical_error("cannot open polarization table " + path);
  std::vector<std::pair<double, Complex>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("nu", 0) == 0) continue;
    std::istringstream row(line);
    double nu, re, im;
    char comma;
    if (!(row >> nu >> comma >> re >> comma >> im))
      throw numerical_error(path + ": malformed polarization table row: " + line);
    rows.emplace_back(nu, Complex(re, im));
  }
  return from_rows(std::move(rows));
}

Complex MTable::at(double nu) const {
  constexpr double kTol = 1e-9;
  if (nu < nu_.front() * (1.0 - kTol) - kTol || nu > nu_.back() * (1.0 + kTol) + kTol) {
    std::ostringstream msg;
    msg << "polarization table covers nu in [" << nu_.front() << ", " << nu_.back()
        << "] but nu = " << nu << " was requested";
    throw numerical_error(msg.str());
  }
  if (nu_.size() == 1) return m_.front();
  const auto it = std::upper_bound(nu_.begin(), nu_.end(), nu);
  const std::size_t i =
      std::clamp<std::size_t>(static_cast<std::size_t>(it - nu_.begin()), 1, nu_.size() - 1) - 1;
  const double t = std::clamp((nu - nu_[i]) / (nu_[i + 1] - nu_[i]), 0.0, 1.0);
  return m_[i] + t * (m_[i + 1] - m_[i]);
}

MaterialFit multi_frequency_fit(const std::vector<std::pair<double, double>>& omega_chat,
                                const MTable& mtable, double mu0,
                                const std::vector<double>& sigma_grid,
                                const std::vector<double>& alpha_grid) {
  std::set<double> distinct;
  for (const auto& [omega, c] : omega_chat) distinct.insert(omega);
  if (distinct.size() < 2)
    throw numerical_error(
        "multi_frequency_fit: a single frequency cannot separate conductivity from size; "
        "provide estimates at two or more frequencies");
  if (sigma_grid.empty() || alpha_grid.empty())
    throw std::invalid_argument("multi_frequency_fit: empty search grid");

  // The table must cover every nu the grid search will query.
  const auto [omega_min, omega_max] =
      std::minmax_element(omega_chat.begin(), omega_chat.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto [sig_min, sig_max] = std::minmax_element(sigma_grid.begin(), sigma_grid.end());
  const auto [al_min, al_max] = std::minmax_element(alpha_grid.begin(), alpha_grid.end());
  const double nu_lo = omega_min->first * mu0 * (*sig_min) * (*al_min) * (*al_min);
  const double nu_hi = omega_max->first * mu0 * (*sig_max) * (*al_max) * (*al_max);
  if (nu_lo < mtable.nu_min() * (1.0 - 1e-9) || nu_hi > mtable.nu_max() * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "multi_frequency_fit: search grid requires nu in [" << nu_lo << ", " << nu_hi
        << "] but the table covers [" << mtable.nu_min() << ", " << mtable.nu_max() << "]";
    throw numerical_error(msg.str());
  }

  MaterialFit best;
  best.objective = std::numeric_limits<double>::infinity();
  for (double sigma : sigma_grid) {
    for (double alpha : alpha_grid) {
      const double a5 = alpha * alpha * alpha * alpha * alpha;
      double obj = 0.0;
      for (const auto& [omega, c_hat] : omega_chat) {
        const double k = omega * mu0 * sigma;
        const double model = k * a5 * mtable.at(k * alpha * alpha).real();
        obj += (c_hat - model) * (c_hat - model);
      }
      if (obj < best.objective) {
        best.objective = obj;
        best.sigma_hat = sigma;
        best.alpha_hat = alpha;
      }
    }
  }
  return best;
}

}  // namespace ecsim
