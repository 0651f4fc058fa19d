#pragma once

#include "ecsim/tracy_widom.hpp"

namespace ecsim {

/// Limiting singular-value density of an N x M white-noise matrix with
/// entry variance sigma_n^2 / M, aspect ratio gamma = N/M >= 1.
/// Support is sigma_n * [sqrt(gamma)-1, sqrt(gamma)+1].
struct QuarterCircleLaw {
  double gamma = 1.0;
  double sigma_n = 1.0;

  double support_min() const;
  double support_max() const;
};

/// Density (1/sigma_n) rho_gamma(sigma/sigma_n) with
/// rho_gamma(s) = sqrt(((sqrt(g)+1)^2 - s^2)(s^2 - (sqrt(g)-1)^2)) / (pi s)
/// on the support, 0 outside.
double quarter_circle_density(double sigma, const QuarterCircleLaw& law);

/// Integrated law  int_0^sigma density; quadrature handles the
/// square-root edges.
double quarter_circle_cdf(double sigma, const QuarterCircleLaw& law);

/// Top-singular-value prediction for a rank-deficient signal buried in
/// white noise of bulk scale sigma_n (spiked model).
struct SpikedPrediction {
  enum class Regime { Subcritical, Supercritical };

  double alpha_spike = 1.0;     // deterministic shift factor, >= 1
  double beta_spike = 0.0;      // fluctuation factor, in [0,1] supercritical
  double predicted_sigma1 = 0;  // sigma1_A0 * alpha, or the bulk edge
  Regime regime = Regime::Subcritical;
};

/// Supercritical iff sigma1_a0 > gamma^{1/4} sigma_n (strict);
///   alpha = sqrt(1 + (1+g) s^2/a^2 + g s^4/a^4)
///   beta  = (1 - g s^4/a^4) / alpha
/// with a = sigma1_a0, s = sigma_n, g = gamma.
SpikedPrediction spiked_prediction(double sigma1_a0, double sigma_n, double gamma);

/// Location/scale of the largest noise-only singular value:
/// sigma1 ~ location + scale * Z1, Z1 type-1 Tracy-Widom.
struct EdgeFluctuation {
  double location;  // sigma_n (sqrt(gamma) + 1)
  double scale;     // sigma_n (1 + gamma^{-1/2})^{1/3} / (2 M^{2/3})
};

EdgeFluctuation max_singular_value_law(double sigma_n, double gamma, int m);

}  // namespace ecsim
