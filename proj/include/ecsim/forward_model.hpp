#pragma once

#include <array>
#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "ecsim/geometry.hpp"

namespace ecsim {

using Complex = std::complex<double>;
using Mat3c = Eigen::Matrix3cd;
using Vec3c = Eigen::Vector3cd;

/// Scalar polarization coefficient of a conductive sphere at nu = 1
/// (copper-like material, skin depth equal to the radius), precomputed
/// externally by an edge-element cell solve.
inline constexpr Complex kSpherePolarizationNu1{-0.4110, -0.0387};

/// Small conductive inclusion z + alpha*B and its material constants.
struct InclusionModel {
  Vec3 z = Vec3::Zero();     // center [m]
  double alpha = 0.01;       // characteristic radius [m]
  double mu0 = 1.2566e-6;    // free-space permeability [H/m]
  double mu_star = 1.2566e-6;// inclusion permeability [H/m]
  double sigma_star = 5.96e7;// inclusion conductivity [S/m]
  double omega = 133.5;      // angular frequency [rad/s]

  void validate() const;  // throws config_error on violated invariants
};

struct DerivedParams {
  double k;          // omega * mu0 * sigma_star  [1/m^2]
  double nu;         // k * alpha^2               [-]
  double skin_depth; // sqrt(2/k)                 [m]
  double mu_ratio;   // mu_star / mu0             [-]
};

DerivedParams derive_params(const InclusionModel& incl);

/// Polarization input data. Exactly one mode is active:
///  - Sphere: the scalar coefficient (sphere inclusion, mu* = mu0).
///  - Tensor: nine 3x3 complex conductivity tensors M^(l,l') plus the
///    real 3x3 magnetic polarization tensor (columns
///    (1 - mu0/mu*) * integral_B (e_i + curl(theta_i)/2)).
struct PolarizationData {
  enum class Mode { Sphere, Tensor };

  Mode mode = Mode::Sphere;
  Complex scalar_m = kSpherePolarizationNu1;
  std::array<Mat3c, 9> conductivity_tensors{};  // index 3*l + lp, l,lp in 0..2
  Mat3 magnetic_tensor = Mat3::Zero();

  static PolarizationData sphere(Complex m);
  static PolarizationData tensor(const std::array<Mat3c, 9>& cond, const Mat3& magnetic);

  const Mat3c& conductivity(int l, int lp) const { return conductivity_tensors[3 * l + lp]; }
};

struct Sensor {
  Vec3 position = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();  // unit dipole direction
};

/// M sources and N receivers, N >= M.
struct SensorArray {
  std::vector<Sensor> sources;
  std::vector<Sensor> receivers;

  int num_sources() const { return static_cast<int>(sources.size()); }
  int num_receivers() const { return static_cast<int>(receivers.size()); }
  double gamma() const { return static_cast<double>(num_receivers()) / num_sources(); }

  void validate(const Vec3& inclusion_center) const;  // throws config_error
};

/// Real N x M response matrix with a lazily computed, cached SVD.
class ResponseMatrix {
 public:
  ResponseMatrix() : lazy_(std::make_shared<Lazy>()) {}
  explicit ResponseMatrix(Eigen::MatrixXd data)
      : data_(std::move(data)), lazy_(std::make_shared<Lazy>()) {}

  const Eigen::MatrixXd& matrix() const { return data_; }
  int rows() const { return static_cast<int>(data_.rows()); }
  int cols() const { return static_cast<int>(data_.cols()); }

  struct Svd {
    Eigen::VectorXd singular_values;  // descending
    Eigen::MatrixXd u;                // thin left singular vectors
    Eigen::MatrixXd v;                // thin right singular vectors
  };

  /// Thread-safe: first caller computes, everyone shares the result.
  const Svd& svd() const;

  const Eigen::VectorXd& singular_values() const { return svd().singular_values; }

 private:
  struct Lazy {
    std::once_flag flag;
    Svd value;
  };

  Eigen::MatrixXd data_;
  std::shared_ptr<Lazy> lazy_;
};

/// q . (H_alpha - H0)(x) for a sphere inclusion (scalar mode):
///   i k alpha^5 M (D^2G(x,z) q)^T (D^2G(z,s) p).
Complex sphere_perturbation(const Vec3& x, const Vec3& s, const Vec3& p, const Vec3& q,
                            const InclusionModel& incl, const PolarizationData& pol);

/// H_alpha - H0 at x for an arbitrary-shape inclusion (tensor mode):
///   i nu alpha^3 sum_{l,l'} (D^2G(x,z))_{ll'} M^(l,l') H0(z)
///   + alpha^3 D^2G(x,z) (T_mag H0(z)).
/// H0_at_z is the incident field at the inclusion center.
Vec3c general_perturbation(const Vec3& x, const InclusionModel& incl,
                           const PolarizationData& pol, const Vec3c& h0_at_z);

/// Unperturbed response matrix of imaginary-part measurements:
///   A0[n,m] = k alpha^5 Re(M) (D^2G(r_n,z) q_n)^T (D^2G(z,s_m) p_m).
/// OpenMP-parallel over entries; `response_matrix_serial` is the
/// reference implementation (bit-identical results).
ResponseMatrix response_matrix(const SensorArray& array, const InclusionModel& incl,
                               const PolarizationData& pol);
ResponseMatrix response_matrix_serial(const SensorArray& array, const InclusionModel& incl,
                                      const PolarizationData& pol);

/// Closed-form diagnostic for the three nonzero singular values
/// (component j = 0,1,2, not sorted):
///   sigma_j = k alpha^5 |Re M| [sum_m (D^2G(z,s_m)p_m)_j^2]^{1/2}
///                              [sum_n (D^2G(r_n,z)q_n)_j^2]^{1/2}.
/// Exact only when the source- and receiver-side component families are
/// orthogonal (true for the default symmetric array); use the SVD of
/// response_matrix whenever it matters.
std::array<double, 3> closed_form_singular_values(const SensorArray& array,
                                                  const InclusionModel& incl,
                                                  const PolarizationData& pol);

/// Number of singular values above rel_tol * sigma_1.
int significant_rank(const Eigen::VectorXd& singular_values, double rel_tol = 1e-8);

}  // namespace ecsim
