#include "ecsim/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ecsim/errors.hpp"

namespace ecsim {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

double separation_or_throw(const Vec3& x, const Vec3& y, const char* what) {
  const double r = (x - y).norm();
  if (r < kCoincidenceTol) {
    std::ostringstream msg;
    msg << what << ": evaluation points coincide (|x-y| = " << r << " m)";
    throw coincident_points_error(msg.str());
  }
  return r;
}

}  // namespace

double green_scalar(const Vec3& x, const Vec3& y) {
  const double r = separation_or_throw(x, y, "green_scalar");
  return 1.0 / (kFourPi * r);
}

Mat3 green_hessian(const Vec3& x, const Vec3& y) {
  const double r = separation_or_throw(x, y, "green_hessian");
  const Vec3 d = x - y;
  const double r2 = r * r;
  const double inv_r5 = 1.0 / (kFourPi * r2 * r2 * r);
  // Materialize the outer product before scaling so the result stays
  // bitwise symmetric.
  const Mat3 outer = d * d.transpose();
  Mat3 h = outer * (3.0 * inv_r5);
  h.diagonal().array() -= r2 * inv_r5;
  return h;
}

Vec3 dipole_field(const Vec3& x, const Vec3& s, const Vec3& p) {
  return green_hessian(x, s) * p;
}

}  // namespace ecsim
