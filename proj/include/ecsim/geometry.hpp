#pragma once

#include <Eigen/Dense>

namespace ecsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Points closer than this are treated as coincident and rejected.
/// A hard error (rather than clamping) keeps near-singular kernel values
/// out of downstream MUSIC denominators.
inline constexpr double kCoincidenceTol = 1e-12;  // meters

/// Free-space Laplace kernel G(x,y) = 1 / (4*pi*|x-y|).   [1/m]
double green_scalar(const Vec3& x, const Vec3& y);

/// Hessian of G in its first argument:
///   H_ij = (3 r_i r_j - |r|^2 delta_ij) / (4*pi*|r|^5),  r = x - y.   [1/m^3]
/// Symmetric, trace-free, and even in r; evaluated in closed form.
Mat3 green_hessian(const Vec3& x, const Vec3& y);

/// Magnetic field at x of a unit magnetic dipole at s with direction p:
/// H0(x) = D^2 G(x,s) p.
Vec3 dipole_field(const Vec3& x, const Vec3& s, const Vec3& p);

}  // namespace ecsim
