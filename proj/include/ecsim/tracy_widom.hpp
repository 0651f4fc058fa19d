#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ecsim {

/// Tabulated type-1 Tracy-Widom distribution.
///
/// Built by integrating the Painleve II equation
///   phi'' = x phi + 2 phi^3,  phi(x) ~ Ai(x) as x -> +infinity
/// backward from the Airy tail (the stable direction for the
/// Hastings-McLeod solution), accumulating along the way the integrals
/// that define the type-1 CDF
///   F1(z) = exp( -1/2 * int_z^inf [ phi(x) + (x - z) phi(x)^2 ] dx )
/// and its density  f1(z) = F1(z) * [ phi(z) + int_z^inf phi^2 ] / 2.
class TracyWidomTable {
 public:
  /// Monotone-cubic interpolated CDF; clamps outside the table range.
  double cdf(double z) const;

  /// Density at z (interpolated).
  double pdf(double z) const;

  /// Functional inverse of cdf. Throws numerical_error for
  /// p outside (1e-6, 1 - 1e-6).
  double quantile(double p) const;

  /// Numerical moments of the tabulated density (Simpson on the grid).
  double mean() const;
  double variance() const;

  const std::vector<double>& grid() const { return z_; }
  const std::vector<double>& cdf_values() const { return cdf_; }
  const std::vector<double>& pdf_values() const { return pdf_; }

  /// Versioned CSV (z, cdf, pdf) with build metadata in the header.
  void save_csv(const std::string& path) const;
  static TracyWidomTable load_csv(const std::string& path);

  friend TracyWidomTable tw1_build_table();

 private:
  struct Interp {
    std::once_flag flag;
    std::vector<double> cdf_slopes, pdf_slopes;
  };

  const Interp& interp() const;

  std::vector<double> z_, cdf_, pdf_;
  std::shared_ptr<Interp> interp_ = std::make_shared<Interp>();
};

/// Integrates Painleve II and tabulates the TW1 distribution on
/// z in [-10, 8], grid step 5e-3, ODE tolerances abs 1e-12 / rel 1e-10.
TracyWidomTable tw1_build_table();

/// Loads `path` if present, otherwise builds the table and saves it there.
TracyWidomTable tw1_table_cached(const std::string& path);

inline double tw1_cdf(const TracyWidomTable& table, double z) { return table.cdf(z); }
inline double tw1_quantile(const TracyWidomTable& table, double p) { return table.quantile(p); }

}  // namespace ecsim
