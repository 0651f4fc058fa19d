#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "ecsim/errors.hpp"
#include "ecsim/forward_model.hpp"
#include "test_util.hpp"

using namespace ecsim;
using namespace ecsim::testing;

namespace {

constexpr double kPi = std::numbers::pi;

InclusionModel paper_inclusion() { return InclusionModel{}; }

SensorArray paper_array() { return paper_config().array; }

/// Conductivity tensors M^(l,l') = m e_l e_{l'}^T reproduce the sphere
/// formula exactly; the sphere path is the oracle for the tensor path.
std::array<Mat3c, 9> sphere_equivalent_tensors(Complex m) {
  std::array<Mat3c, 9> tensors;
  for (int l = 0; l < 3; ++l)
    for (int lp = 0; lp < 3; ++lp) {
      Mat3c t = Mat3c::Zero();
      t(l, lp) = m;
      tensors[3 * l + lp] = t;
    }
  return tensors;
}

}  // namespace

TEST_CASE("derive_params on the reference material") {
  const DerivedParams d = derive_params(paper_inclusion());
  // omega = 133.5 was chosen to put k alpha^2 at 1.
  CHECK(d.k == doctest::Approx(133.5 * 1.2566e-6 * 5.96e7).epsilon(1e-14));
  CHECK(d.k == doctest::Approx(1.0e4).epsilon(1e-3));
  CHECK(d.nu == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(d.mu_ratio == 1.0);
}

TEST_CASE("derive_params closed forms") {
  InclusionModel incl;
  incl.omega = 1.0;
  incl.mu0 = 1.0;
  incl.sigma_star = 2.0;  // k = 2
  incl.mu_star = 3.0;
  incl.alpha = 0.5;
  const DerivedParams d = derive_params(incl);
  CHECK(d.k == 2.0);
  CHECK(d.skin_depth == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.nu == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.mu_ratio == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("invariant violations are rejected") {
  InclusionModel incl;
  incl.alpha = -1.0;
  CHECK_THROWS_AS(derive_params(incl), config_error);
  incl = InclusionModel{};
  incl.sigma_star = 0.0;
  CHECK_THROWS_AS(derive_params(incl), config_error);
}

TEST_CASE("sphere_perturbation worked example") {
  // z = 0, x = s = (0,0,1), p = q = e3, k = 1e4 (via sigma_star), alpha = 0.01.
  InclusionModel incl;
  incl.omega = 1.0;
  incl.mu0 = 1.0;
  incl.sigma_star = 1.0e4;
  incl.mu_star = 1.0;
  incl.alpha = 0.01;
  const PolarizationData pol = PolarizationData::sphere(kSpherePolarizationNu1);

  const Complex value =
      sphere_perturbation({0, 0, 1}, {0, 0, 1}, Vec3::UnitZ(), Vec3::UnitZ(), incl, pol);

  // Independent evaluation: the axial Hessian applied to e3 is
  // (0,0,1/(2 pi)), so the kernel product is 1/(4 pi^2).
  const Complex expected =
      Complex(0, 1) * 1.0e4 * std::pow(0.01, 5) * kSpherePolarizationNu1 / (4.0 * kPi * kPi);
  CHECK(std::abs(value - expected) <= 1e-14 * std::abs(expected));
  CHECK(value.real() == doctest::Approx(9.80e-10).epsilon(5e-3));
  CHECK(value.imag() == doctest::Approx(-1.0411e-8).epsilon(5e-4));
}

TEST_CASE("sphere_perturbation vanishes with the coefficient and is reciprocal") {
  InclusionModel incl = paper_inclusion();
  const PolarizationData zero = PolarizationData::sphere(Complex(0, 0));
  CHECK(sphere_perturbation({0.3, -1, 1}, {1, 2, 1}, Vec3::UnitZ(), Vec3::UnitZ(), incl, zero) ==
        Complex(0, 0));

  const PolarizationData pol = PolarizationData::sphere(kSpherePolarizationNu1);
  std::mt19937_64 eng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 x = random_point(eng, 2.0) + Vec3(0, 0, 1.5);
    const Vec3 s = random_point(eng, 2.0) + Vec3(0, 0, 1.5);
    const Vec3 p = random_unit(eng);
    const Vec3 q = random_unit(eng);
    const Complex forward = sphere_perturbation(x, s, p, q, incl, pol);
    const Complex swapped = sphere_perturbation(s, x, q, p, incl, pol);
    CHECK(std::abs(forward - swapped) <= 1e-12 * std::abs(forward));
  }
}

TEST_CASE("general_perturbation: zero tensors give zero") {
  const PolarizationData pol = PolarizationData::tensor({}, Mat3::Zero());
  const Vec3c out = general_perturbation({1, 1, 1}, paper_inclusion(), pol, Vec3c(1, 2, 3));
  CHECK(out.norm() == 0.0);
}

TEST_CASE("general_perturbation matches sphere_perturbation on sphere-equivalent tensors") {
  InclusionModel incl = paper_inclusion();
  const Complex m = kSpherePolarizationNu1;
  const PolarizationData sphere = PolarizationData::sphere(m);
  const PolarizationData tensor =
      PolarizationData::tensor(sphere_equivalent_tensors(m), Mat3::Zero());

  std::mt19937_64 eng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 x = random_point(eng, 1.5) + Vec3(0, 0, 1.2);
    const Vec3 s = random_point(eng, 1.5) - Vec3(0, 0, 1.2);
    const Vec3 p = random_unit(eng);
    const Vec3 q = random_unit(eng);

    const Vec3 h0 = dipole_field(incl.z, s, p);
    const Vec3c general = general_perturbation(x, incl, tensor, h0.cast<Complex>());
    const Complex projected = q.cast<Complex>().dot(general);
    const Complex reference = sphere_perturbation(x, s, p, q, incl, sphere);
    CHECK(std::abs(projected - reference) <= 1e-10 * std::abs(reference));
  }
}

TEST_CASE("general_perturbation rotates covariantly") {
  InclusionModel incl = paper_inclusion();
  const PolarizationData tensor =
      PolarizationData::tensor(sphere_equivalent_tensors(kSpherePolarizationNu1), Mat3::Zero());
  std::mt19937_64 eng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 x = random_point(eng, 1.0) + Vec3(0, 0, 1.5);
    const Vec3c h0 = Vec3(random_unit(eng)).cast<Complex>();
    const Mat3 rot = random_rotation(eng);

    InclusionModel rotated = incl;
    rotated.z = rot * incl.z;
    // Sphere-structured tensors are rotation invariant, so only the
    // geometry moves.
    const Vec3c out_rotated =
        general_perturbation(rot * x, rotated, tensor, (rot.cast<Complex>() * h0));
    const Vec3c expected = rot.cast<Complex>() * general_perturbation(x, incl, tensor, h0);
    CHECK((out_rotated - expected).norm() <= 1e-12 * expected.norm());
  }
}

TEST_CASE("response_matrix on the reference array is rank 3") {
  const ScenarioConfig cfg = paper_config();
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  REQUIRE(a0.rows() == 256);
  REQUIRE(a0.cols() == 256);

  const Eigen::VectorXd& sv = a0.singular_values();
  CHECK(significant_rank(sv) == 3);
  CHECK(sv(3) / sv(0) < 1e-10);

  // Parseval: Frobenius norm accounted for by the spectrum.
  const double frob2 = a0.matrix().squaredNorm();
  CHECK(sv.squaredNorm() == doctest::Approx(frob2).epsilon(1e-12));
}

TEST_CASE("response_matrix symmetry for coincident arrays with p = q") {
  const ScenarioConfig cfg = paper_config();
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const Eigen::MatrixXd& m = a0.matrix();
  CHECK((m - m.transpose()).norm() <= 1e-12 * m.norm());
}

TEST_CASE("response_matrix scaling in Re(M) and alpha^5") {
  ScenarioConfig cfg = paper_config();
  const ResponseMatrix base = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);

  SUBCASE("zero Re(M) zeroes the matrix") {
    const PolarizationData pol = PolarizationData::sphere(Complex(0.0, -0.5));
    const ResponseMatrix zero = response_matrix(cfg.array, cfg.inclusion, pol);
    CHECK(zero.matrix().norm() == 0.0);
  }

  SUBCASE("linear in Re(M)") {
    const PolarizationData doubled =
        PolarizationData::sphere(2.0 * kSpherePolarizationNu1.real());
    const ResponseMatrix scaled = response_matrix(cfg.array, cfg.inclusion, doubled);
    CHECK((scaled.matrix() - 2.0 * base.matrix()).norm() <= 1e-12 * base.matrix().norm());
  }

  SUBCASE("alpha doubling multiplies entries by 32 at fixed k") {
    InclusionModel big = cfg.inclusion;
    big.alpha = 2.0 * cfg.inclusion.alpha;
    const ResponseMatrix scaled = response_matrix(cfg.array, big, cfg.polarization);
    CHECK((scaled.matrix() - 32.0 * base.matrix()).norm() <= 1e-12 * scaled.matrix().norm());
  }
}

TEST_CASE("response_matrix names the offending sensor on coincidence") {
  ScenarioConfig cfg = paper_config();
  SensorArray array = cfg.array;
  array.receivers[5].position = cfg.inclusion.z;
  try {
    response_matrix(array, cfg.inclusion, cfg.polarization);
    FAIL("expected a coincidence error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("receiver 5") != std::string::npos);
  }
}

TEST_CASE("closed_form_singular_values: single axial sensor pair") {
  InclusionModel incl = paper_inclusion();
  SensorArray array;
  array.sources.push_back({Vec3(0, 0, 1), Vec3::UnitZ()});
  array.receivers.push_back({Vec3(0, 0, 1), Vec3::UnitZ()});

  const auto sv = closed_form_singular_values(array, incl, paper_config().polarization);
  const DerivedParams d = derive_params(incl);
  const double expected = d.k * std::pow(incl.alpha, 5) *
                          std::abs(kSpherePolarizationNu1.real()) / (4.0 * kPi * kPi);
  CHECK(sv[0] == 0.0);
  CHECK(sv[1] == 0.0);
  CHECK(sv[2] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("closed_form_singular_values: zero Re(M)") {
  const ScenarioConfig cfg = paper_config();
  const PolarizationData pol = PolarizationData::sphere(Complex(0.0, 1.0));
  const auto sv = closed_form_singular_values(cfg.array, cfg.inclusion, pol);
  CHECK(sv[0] == 0.0);
  CHECK(sv[1] == 0.0);
  CHECK(sv[2] == 0.0);
}

TEST_CASE("closed_form_singular_values vs the exact SVD") {
  const ScenarioConfig cfg = paper_config();

  // The symmetric reference array makes the component families
  // orthogonal, so the closed form is exact there.
  auto closed = closed_form_singular_values(cfg.array, cfg.inclusion, cfg.polarization);
  std::sort(closed.begin(), closed.end(), std::greater<>());
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const Eigen::VectorXd& sv = a0.singular_values();
  for (int j = 0; j < 3; ++j)
    CHECK(closed[j] == doctest::Approx(sv(j)).epsilon(1e-10));

  // On an asymmetric array it is only a diagnostic; report the deviation.
  SensorArray skewed = cfg.array;
  skewed.sources.resize(64);
  skewed.receivers.resize(200);
  auto approx = closed_form_singular_values(skewed, cfg.inclusion, cfg.polarization);
  std::sort(approx.begin(), approx.end(), std::greater<>());
  const ResponseMatrix skewed_a0 = response_matrix(skewed, cfg.inclusion, cfg.polarization);
  const double rel_dev = std::abs(approx[0] - skewed_a0.singular_values()(0)) /
                         skewed_a0.singular_values()(0);
  MESSAGE("closed-form vs exact sigma_1 relative deviation (asymmetric array): ", rel_dev);
  CHECK(std::isfinite(rel_dev));
}

TEST_CASE("parallel and serial response assembly agree bit-for-bit") {
  const ScenarioConfig cfg = paper_config();
  const ResponseMatrix par = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const ResponseMatrix ser = response_matrix_serial(cfg.array, cfg.inclusion, cfg.polarization);
  CHECK(par.matrix() == ser.matrix());
}
