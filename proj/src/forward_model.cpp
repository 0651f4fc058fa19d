#include "ecsim/forward_model.hpp"

#include <cmath>
#include <sstream>

#include "ecsim/errors.hpp"

namespace ecsim {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw config_error(what);
}

void check_unit(const Vec3& v, const char* what) {
  if (std::abs(v.norm() - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << what << ": dipole direction must be a unit vector (|v| = " << v.norm() << ")";
    throw config_error(msg.str());
  }
}

}  // namespace

void InclusionModel::validate() const {
  require(z.allFinite(), "inclusion center must be finite");
  require(alpha > 0.0, "inclusion radius alpha must be positive");
  require(sigma_star > 0.0, "inclusion conductivity sigma_star must be positive");
  require(mu0 > 0.0, "free-space permeability mu0 must be positive");
  require(mu_star > 0.0, "inclusion permeability mu_star must be positive");
  require(omega > 0.0, "angular frequency omega must be positive");
}

DerivedParams derive_params(const InclusionModel& incl) {
  incl.validate();
  DerivedParams d;
  d.k = incl.omega * incl.mu0 * incl.sigma_star;
  d.nu = d.k * incl.alpha * incl.alpha;
  d.skin_depth = std::sqrt(2.0 / d.k);
  d.mu_ratio = incl.mu_star / incl.mu0;
  return d;
}

PolarizationData PolarizationData::sphere(Complex m) {
  PolarizationData p;
  p.mode = Mode::Sphere;
  p.scalar_m = m;
  return p;
}

PolarizationData PolarizationData::tensor(const std::array<Mat3c, 9>& cond, const Mat3& magnetic) {
  PolarizationData p;
  p.mode = Mode::Tensor;
  p.conductivity_tensors = cond;
  p.magnetic_tensor = magnetic;
  return p;
}

void SensorArray::validate(const Vec3& inclusion_center) const {
  require(!sources.empty(), "sensor array needs at least one source");
  require(!receivers.empty(), "sensor array needs at least one receiver");
  require(num_receivers() >= num_sources(),
          "sensor array needs at least as many receivers as sources (N >= M)");
  for (std::size_t m = 0; m < sources.size(); ++m) {
    check_unit(sources[m].direction, "source");
    if ((sources[m].position - inclusion_center).norm() < kCoincidenceTol)
      throw config_error("source " + std::to_string(m) + " coincides with the inclusion center");
  }
  for (std::size_t n = 0; n < receivers.size(); ++n) {
    check_unit(receivers[n].direction, "receiver");
    if ((receivers[n].position - inclusion_center).norm() < kCoincidenceTol)
      throw config_error("receiver " + std::to_string(n) +
                         " coincides with the inclusion center");
  }
}

const ResponseMatrix::Svd& ResponseMatrix::svd() const {
  std::call_once(lazy_->flag, [this] {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(data_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    lazy_->value.singular_values = svd.singularValues();
    lazy_->value.u = svd.matrixU();
    lazy_->value.v = svd.matrixV();
  });
  return lazy_->value;
}

Complex sphere_perturbation(const Vec3& x, const Vec3& s, const Vec3& p, const Vec3& q,
                            const InclusionModel& incl, const PolarizationData& pol) {
  if (pol.mode != PolarizationData::Mode::Sphere)
    throw config_error("sphere_perturbation requires sphere-mode polarization data");
  const DerivedParams d = derive_params(incl);
  const double a = incl.alpha;
  const Vec3 g_recv = green_hessian(x, incl.z) * q;
  const Vec3 g_src = green_hessian(incl.z, s) * p;
  const double kernel = g_recv.dot(g_src);
  return Complex(0.0, 1.0) * d.k * a * a * a * a * a * pol.scalar_m * kernel;
}

Vec3c general_perturbation(const Vec3& x, const InclusionModel& incl,
                           const PolarizationData& pol, const Vec3c& h0_at_z) {
  if (pol.mode != PolarizationData::Mode::Tensor)
    throw config_error("general_perturbation requires tensor-mode polarization data");
  const DerivedParams d = derive_params(incl);
  const double a3 = incl.alpha * incl.alpha * incl.alpha;
  const Mat3 hessian = green_hessian(x, incl.z);

  Vec3c conductivity_term = Vec3c::Zero();
  for (int l = 0; l < 3; ++l)
    for (int lp = 0; lp < 3; ++lp)
      conductivity_term += hessian(l, lp) * (pol.conductivity(l, lp) * h0_at_z);

  const Vec3c magnetic_term = hessian * (pol.magnetic_tensor.cast<Complex>() * h0_at_z);
  return Complex(0.0, 1.0) * d.nu * a3 * conductivity_term + a3 * magnetic_term;
}

namespace {

struct KernelVectors {
  Eigen::MatrixXd source;    // M x 3, row m = D^2G(z, s_m) p_m
  Eigen::MatrixXd receiver;  // N x 3, row n = D^2G(r_n, z) q_n
  double scale;              // k alpha^5 Re(M)
};

KernelVectors kernel_vectors(const SensorArray& array, const InclusionModel& incl,
                             const PolarizationData& pol) {
  if (pol.mode != PolarizationData::Mode::Sphere)
    throw config_error("response matrix synthesis requires sphere-mode polarization data");
  array.validate(incl.z);
  const DerivedParams d = derive_params(incl);
  const double a = incl.alpha;

  KernelVectors kv;
  kv.scale = d.k * a * a * a * a * a * pol.scalar_m.real();
  kv.source.resize(array.num_sources(), 3);
  kv.receiver.resize(array.num_receivers(), 3);
  for (int m = 0; m < array.num_sources(); ++m) {
    const Sensor& s = array.sources[m];
    try {
      kv.source.row(m) = (green_hessian(incl.z, s.position) * s.direction).transpose();
    } catch (const coincident_points_error&) {
      throw coincident_points_error("source " + std::to_string(m) +
                                    " coincides with the inclusion center");
    }
  }
  for (int n = 0; n < array.num_receivers(); ++n) {
    const Sensor& r = array.receivers[n];
    try {
      kv.receiver.row(n) = (green_hessian(r.position, incl.z) * r.direction).transpose();
    } catch (const coincident_points_error&) {
      throw coincident_points_error("receiver " + std::to_string(n) +
                                    " coincides with the inclusion center");
    }
  }
  return kv;
}

template <bool kParallel>
ResponseMatrix assemble_response(const SensorArray& array, const InclusionModel& incl,
                                 const PolarizationData& pol) {
  const KernelVectors kv = kernel_vectors(array, incl, pol);
  const int rows = array.num_receivers();
  const int cols = array.num_sources();
  Eigen::MatrixXd a0(rows, cols);
#pragma omp parallel for if (kParallel) schedule(static)
  for (int n = 0; n < rows; ++n)
    for (int m = 0; m < cols; ++m)
      a0(n, m) = kv.scale * kv.receiver.row(n).dot(kv.source.row(m));
  return ResponseMatrix(std::move(a0));
}

}  // namespace

ResponseMatrix response_matrix(const SensorArray& array, const InclusionModel& incl,
                               const PolarizationData& pol) {
  return assemble_response<true>(array, incl, pol);
}

ResponseMatrix response_matrix_serial(const SensorArray& array, const InclusionModel& incl,
                                      const PolarizationData& pol) {
  return assemble_response<false>(array, incl, pol);
}

std::array<double, 3> closed_form_singular_values(const SensorArray& array,
                                                  const InclusionModel& incl,
                                                  const PolarizationData& pol) {
  const KernelVectors kv = kernel_vectors(array, incl, pol);
  std::array<double, 3> sv{};
  for (int j = 0; j < 3; ++j)
    sv[j] = std::abs(kv.scale) * kv.source.col(j).norm() * kv.receiver.col(j).norm();
  return sv;
}

int significant_rank(const Eigen::VectorXd& singular_values, double rel_tol) {
  if (singular_values.size() == 0) return 0;
  const double cutoff = rel_tol * singular_values(0);
  int rank = 0;
  for (Eigen::Index j = 0; j < singular_values.size(); ++j)
    if (singular_values(j) > cutoff) ++rank;
  return rank;
}

}  // namespace ecsim
