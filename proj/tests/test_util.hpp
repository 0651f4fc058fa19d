#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ecsim/config.hpp"
#include "ecsim/geometry.hpp"

namespace ecsim::testing {

/// Second-order central finite differences of green_scalar; the
/// independent oracle for the closed-form Hessian.
inline Mat3 hessian_by_finite_differences(const Vec3& x, const Vec3& y, double h) {
  Mat3 fd;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) {
        Vec3 xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        fd(i, j) =
            (green_scalar(xp, y) - 2.0 * green_scalar(x, y) + green_scalar(xm, y)) / (h * h);
      } else {
        Vec3 xpp = x, xpm = x, xmp = x, xmm = x;
        xpp(i) += h; xpp(j) += h;
        xpm(i) += h; xpm(j) -= h;
        xmp(i) -= h; xmp(j) += h;
        xmm(i) -= h; xmm(j) -= h;
        fd(i, j) = (green_scalar(xpp, y) - green_scalar(xpm, y) - green_scalar(xmp, y) +
                    green_scalar(xmm, y)) /
                   (4.0 * h * h);
      }
    }
  }
  return fd;
}

inline Vec3 random_unit(std::mt19937_64& eng) {
  std::normal_distribution<double> n;
  Vec3 v(n(eng), n(eng), n(eng));
  return v.normalized();
}

inline Vec3 random_point(std::mt19937_64& eng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(eng), u(eng), u(eng));
}

/// Random rotation via QR of a Gaussian matrix (sign-fixed to det +1).
inline Mat3 random_rotation(std::mt19937_64& eng) {
  std::normal_distribution<double> n;
  Mat3 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = n(eng);
  Eigen::HouseholderQR<Mat3> qr(g);
  Mat3 rot = qr.householderQ();
  if (rot.determinant() < 0) rot.col(0) *= -1.0;
  return rot;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / xs.size();
}

inline double variance(const std::vector<double>& xs) {
  const double mu = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / (xs.size() - 1);
}

/// Kolmogorov-Smirnov statistic of samples against a reference CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// The reference experiment: 16x16 coincident vertical-dipole arrays on
/// [-2,2]^2 x {1} over an inclusion at the origin.
inline ScenarioConfig paper_config() { return default_config(); }

}  // namespace ecsim::testing
