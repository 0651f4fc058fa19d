#include "ecsim/tracy_widom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/airy.hpp>
#include <boost/numeric/odeint.hpp>

#include "ecsim/csv.hpp"
#include "ecsim/errors.hpp"
#include "ecsim/version.hpp"

namespace ecsim {

namespace {

// Build parameters; recorded in the CSV metadata.
constexpr double kStartX = 8.0;    // where phi is matched to Ai
constexpr double kZMin = -10.0;
constexpr double kZMax = 8.0;
constexpr double kGridStep = 5e-3;
constexpr double kOdeAbsTol = 1e-12;
constexpr double kOdeRelTol = 1e-10;
constexpr int kTableVersion = 1;

// State: phi, phi', and the running tail integrals
// I1 = int_x^inf phi,  I2 = int_x^inf phi^2,  I3 = int_x^inf t phi^2 dt.
using State = std::array<double, 5>;

void painleve_rhs(const State& y, State& dydx, double x) {
  const double phi = y[0];
  dydx[0] = y[1];
  dydx[1] = x * phi + 2.0 * phi * phi * phi;
  dydx[2] = -phi;
  dydx[3] = -phi * phi;
  dydx[4] = -x * phi * phi;
}

double cdf_from_state(double z, const State& y) {
  // int_z^inf [phi + (x - z) phi^2] dx = I1 + I3 - z I2
  return std::exp(-0.5 * (y[2] + y[4] - z * y[3]));
}

double pdf_from_state(double z, const State& y) {
  return 0.5 * (y[0] + y[3]) * cdf_from_state(z, y);
}

// Monotone cubic (Fritsch-Carlson) slopes for data on a sorted grid.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i)
    m[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      m[i] = m[i + 1] = 0.0;
      continue;
    }
    const double a = m[i] / d[i];
    const double b = m[i + 1] / d[i];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double t = 3.0 / std::sqrt(s);
      m[i] = t * a * d[i];
      m[i + 1] = t * b * d[i];
    }
  }
  return m;
}

double pchip_eval(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& m, double xq) {
  if (xq <= x.front()) return y.front();
  if (xq >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), xq);
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  const double h = x[i + 1] - x[i];
  const double t = (xq - x[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return y[i] * (2 * t3 - 3 * t2 + 1) + h * m[i] * (t3 - 2 * t2 + t) +
         y[i + 1] * (-2 * t3 + 3 * t2) + h * m[i + 1] * (t3 - t2);
}

}  // namespace

TracyWidomTable tw1_build_table() {
  namespace odeint = boost::numeric::odeint;

  const double ai = boost::math::airy_ai(kStartX);
  const double aip = boost::math::airy_ai_prime(kStartX);

  // Tail integrals at the matching point. I2 and I3 have closed forms in
  // Airy functions; I1 is quadrature of Ai over the (negligible) tail.
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double i1 = integrator.integrate([](double t) { return boost::math::airy_ai(t); },
                                         kStartX, kStartX + 12.0);
  const double i2 = aip * aip - kStartX * ai * ai;
  const double i3 =
      (kStartX * aip * aip - kStartX * kStartX * ai * ai - ai * aip) / 3.0;

  State y{ai, aip, i1, i2, i3};

  const int steps = static_cast<int>(std::llround((kStartX - kZMin) / kGridStep));
  const int table_points = static_cast<int>(std::llround((kZMax - kZMin) / kGridStep)) + 1;

  TracyWidomTable table;
  table.z_.reserve(table_points);
  table.cdf_.reserve(table_points);
  table.pdf_.reserve(table_points);

  auto stepper = odeint::make_controlled<odeint::runge_kutta_fehlberg78<State>>(
      kOdeAbsTol, kOdeRelTol);
  try {
    // March between exact grid abscissae so the table endpoints are hit
    // regardless of how the controlled stepper subdivides.
    for (int k = 0; k <= steps; ++k) {
      const double x = kStartX - k * kGridStep;
      if (k > 0)
        odeint::integrate_adaptive(stepper, painleve_rhs, y, kStartX - (k - 1) * kGridStep, x,
                                   -1e-3);
      if (x <= kZMax + 0.5 * kGridStep) {
        table.z_.push_back(x);
        table.cdf_.push_back(cdf_from_state(x, y));
        table.pdf_.push_back(pdf_from_state(x, y));
      }
    }
  } catch (const std::exception& e) {
    throw numerical_error(std::string("Painleve II integration failed: ") + e.what());
  }

  std::reverse(table.z_.begin(), table.z_.end());
  std::reverse(table.cdf_.begin(), table.cdf_.end());
  std::reverse(table.pdf_.begin(), table.pdf_.end());

  if (static_cast<int>(table.z_.size()) != table_points ||
      !(table.cdf_.front() < 1e-6) || !(table.cdf_.back() > 1.0 - 1e-6)) {
    std::ostringstream msg;
    msg << "Painleve II integration produced an invalid TW1 table: rows=" << table.z_.size()
        << " (want " << table_points << "), cdf(" << kZMin << ")=" << table.cdf_.front()
        << ", cdf(" << kZMax << ")=" << table.cdf_.back();
    throw numerical_error(msg.str());
  }
  return table;
}

const TracyWidomTable::Interp& TracyWidomTable::interp() const {
  std::call_once(interp_->flag, [this] {
    interp_->cdf_slopes = pchip_slopes(z_, cdf_);
    interp_->pdf_slopes = pchip_slopes(z_, pdf_);
  });
  return *interp_;
}

double TracyWidomTable::cdf(double z) const {
  return std::clamp(pchip_eval(z_, cdf_, interp().cdf_slopes, z), 0.0, 1.0);
}

double TracyWidomTable::pdf(double z) const {
  return std::max(0.0, pchip_eval(z_, pdf_, interp().pdf_slopes, z));
}

double TracyWidomTable::quantile(double p) const {
  if (!(p > 1e-6 && p < 1.0 - 1e-6))
    throw numerical_error("TW1 quantile requested outside the tabulated range (1e-6, 1-1e-6)");
  double lo = z_.front(), hi = z_.back();
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

double simpson(const std::vector<double>& z, const std::vector<double>& f) {
  // Uniform grid with an even number of intervals by construction.
  const std::size_t n = z.size();
  const double h = z[1] - z[0];
  double s = f[0] + f[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i) s += f[i] * ((i % 2) ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

double TracyWidomTable::mean() const {
  std::vector<double> zf(z_.size());
  for (std::size_t i = 0; i < z_.size(); ++i) zf[i] = z_[i] * pdf_[i];
  return simpson(z_, zf);
}

double TracyWidomTable::variance() const {
  const double mu = mean();
  std::vector<double> zf(z_.size());
  for (std::size_t i = 0; i < z_.size(); ++i) zf[i] = (z_[i] - mu) * (z_[i] - mu) * pdf_[i];
  return simpson(z_, zf);
}

void TracyWidomTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw numerical_error("cannot open " + path + " for writing");
  out << "# ecsim " << kVersion << " tw1 table v" << kTableVersion << "\n";
  out << "# z_min=" << kZMin << " z_max=" << kZMax << " dz=" << kGridStep
      << " ode_abs_tol=" << kOdeAbsTol << " ode_rel_tol=" << kOdeRelTol << "\n";
  out << "z,cdf,pdf\n";
  for (std::size_t i = 0; i < z_.size(); ++i)
    out << format_double(z_[i]) << ',' << format_double(cdf_[i]) << ','
        << format_double(pdf_[i]) << '\n';
}

TracyWidomTable TracyWidomTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw numerical_error("cannot open TW1 table " + path);
  std::string line;
  if (!std::getline(in, line) || line.find("tw1 table v") == std::string::npos)
    throw numerical_error(path + " is not a TW1 table (missing version header)");
  TracyWidomTable table;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'z') continue;
    std::istringstream row(line);
    double z, c, p;
    char comma;
    if (!(row >> z >> comma >> c >> comma >> p))
      throw numerical_error("malformed TW1 table row: " + line);
    table.z_.push_back(z);
    table.cdf_.push_back(c);
    table.pdf_.push_back(p);
  }
  if (table.z_.size() < 100)
    throw numerical_error(path + " holds too few TW1 table rows");
  return table;
}

TracyWidomTable tw1_table_cached(const std::string& path) {
  if (std::ifstream(path).good()) return TracyWidomTable::load_csv(path);
  TracyWidomTable table = tw1_build_table();
  table.save_csv(path);
  return table;
}

}  // namespace ecsim
