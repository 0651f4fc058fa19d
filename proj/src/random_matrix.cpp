#include "ecsim/random_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ecsim/errors.hpp"

namespace ecsim {

double QuarterCircleLaw::support_min() const { return sigma_n * (std::sqrt(gamma) - 1.0); }
double QuarterCircleLaw::support_max() const { return sigma_n * (std::sqrt(gamma) + 1.0); }

namespace {

double rho_gamma(double s, double gamma) {
  const double a = std::sqrt(gamma) - 1.0;
  const double b = std::sqrt(gamma) + 1.0;
  if (s <= a || s > b) return 0.0;
  const double upper = std::max(0.0, b * b - s * s);
  const double lower = std::max(0.0, s * s - a * a);
  return std::sqrt(upper * lower) / (std::numbers::pi * s);
}

}  // namespace

double quarter_circle_density(double sigma, const QuarterCircleLaw& law) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("quarter_circle_density: sigma must be >= 0");
  if (law.sigma_n <= 0.0) return 0.0;
  return rho_gamma(sigma / law.sigma_n, law.gamma) / law.sigma_n;
}

double quarter_circle_cdf(double sigma, const QuarterCircleLaw& law) {
  if (law.sigma_n <= 0.0) return sigma >= 0.0 ? 1.0 : 0.0;
  const double a = law.support_min();
  const double b = law.support_max();
  if (sigma <= a) return 0.0;
  if (sigma >= b) return 1.0;
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double gamma = law.gamma;
  const double sn = law.sigma_n;
  const double mass = integrator.integrate(
      [gamma, sn](double s) { return rho_gamma(s / sn, gamma) / sn; }, a, sigma);
  return std::clamp(mass, 0.0, 1.0);
}

SpikedPrediction spiked_prediction(double sigma1_a0, double sigma_n, double gamma) {
  if (!(sigma1_a0 >= 0.0) || !(sigma_n > 0.0) || !(gamma >= 1.0))
    throw std::invalid_argument("spiked_prediction: need sigma1_a0 >= 0, sigma_n > 0, gamma >= 1");
  SpikedPrediction pred;
  const double edge = sigma_n * (std::sqrt(gamma) + 1.0);
  if (sigma1_a0 <= 0.0) {
    pred.alpha_spike = std::numeric_limits<double>::infinity();
    pred.beta_spike = 0.0;
    pred.predicted_sigma1 = edge;
    return pred;
  }
  const double r2 = (sigma_n / sigma1_a0) * (sigma_n / sigma1_a0);
  pred.alpha_spike = std::sqrt(1.0 + (1.0 + gamma) * r2 + gamma * r2 * r2);
  pred.beta_spike = (1.0 - gamma * r2 * r2) / pred.alpha_spike;
  if (sigma1_a0 > std::pow(gamma, 0.25) * sigma_n) {
    pred.regime = SpikedPrediction::Regime::Supercritical;
    pred.predicted_sigma1 = sigma1_a0 * pred.alpha_spike;
  } else {
    pred.regime = SpikedPrediction::Regime::Subcritical;
    pred.predicted_sigma1 = edge;
  }
  return pred;
}

EdgeFluctuation max_singular_value_law(double sigma_n, double gamma, int m) {
  if (m < 4) throw std::invalid_argument("max_singular_value_law: need M >= 4");
  EdgeFluctuation law;
  const double sqrt_gamma = std::sqrt(gamma);
  law.location = sigma_n * (sqrt_gamma + 1.0);
  law.scale = sigma_n * std::cbrt(1.0 + 1.0 / sqrt_gamma) /
              (2.0 * std::pow(static_cast<double>(m), 2.0 / 3.0));
  return law;
}

}  // namespace ecsim
