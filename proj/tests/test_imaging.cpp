#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ecsim/acquisition.hpp"
#include "ecsim/errors.hpp"
#include "ecsim/imaging.hpp"
#include "ecsim/rng.hpp"
#include "test_util.hpp"

using namespace ecsim;
using namespace ecsim::testing;

namespace {

// Receiver-side steering vectors g_l(z); spans the column space of A0.
Eigen::VectorXd steering_column(const SensorArray& array, const Vec3& z, int l) {
  Eigen::VectorXd g(array.num_receivers());
  for (int n = 0; n < array.num_receivers(); ++n)
    g(n) = (green_hessian(array.receivers[n].position, z) * array.receivers[n].direction)(l);
  return g;
}

}  // namespace

TEST_CASE("search grid indexing round trip") {
  SearchGrid grid;
  grid.counts = {5, 4, 3};
  grid.lo = Vec3(-1, -2, 0);
  grid.hi = Vec3(1, 2, 1);
  CHECK(grid.num_nodes() == 60);
  for (int i = 0; i < grid.num_nodes(); ++i) {
    const auto idx = grid.indices(i);
    CHECK((idx[0] * grid.counts[1] + idx[1]) * grid.counts[2] + idx[2] == i);
  }
  CHECK(grid.node(0) == grid.lo);
  CHECK(grid.node(grid.num_nodes() - 1) == grid.hi);
}

TEST_CASE("projector algebra on the noiseless response matrix") {
  const ScenarioConfig cfg = paper_config();
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const SignalProjector proj = signal_projector(a0, 3);
  CHECK_FALSE(proj.rank_deficient);

  const Eigen::MatrixXd p = proj.matrix();
  CHECK(p.rows() == 256);
  CHECK(std::abs(p.trace() - 3.0) < 1e-12);
  CHECK((p * p - p).norm() < 1e-12);
  CHECK((p - p.transpose()).norm() < 1e-12);
}

TEST_CASE("rank-deficiency warning and noise-only projectors") {
  // Rank-1 data cannot support a rank-3 signal space.
  Eigen::MatrixXd rank1 = Eigen::MatrixXd::Zero(16, 16);
  rank1(0, 0) = 1.0;
  const SignalProjector starved = signal_projector(ResponseMatrix(rank1), 3);
  CHECK(starved.rank_deficient);
  CHECK_THROWS_AS(signal_projector(ResponseMatrix(rank1), 0), std::invalid_argument);
  CHECK_THROWS_AS(signal_projector(ResponseMatrix(rank1), 17), std::invalid_argument);

  // A noise-only projector produces no sharp peak.
  const ScenarioConfig cfg = paper_config();
  const ResponseMatrix noise =
      acquire_hadamard(ResponseMatrix(Eigen::MatrixXd::Zero(256, 256)), {1.0, 21});
  const MusicImage image =
      music_scan(cfg.grid, signal_projector(noise, 3), cfg.array.receivers);
  CHECK(peak_to_median(image) < 5.0);
}

TEST_CASE("signal space contains the steering vectors at the true center") {
  const ScenarioConfig cfg = paper_config();
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const SignalProjector proj = signal_projector(a0, 3);
  for (int l = 0; l < 3; ++l) {
    const Eigen::VectorXd g = steering_column(cfg.array, cfg.inclusion.z, l);
    const double residual = (g - proj.basis * (proj.basis.transpose() * g)).norm() / g.norm();
    CHECK(residual < 1e-8);
  }
}

TEST_CASE("music_value degenerate projectors") {
  const ScenarioConfig cfg = paper_config();
  const int n = cfg.array.num_receivers();

  SignalProjector full;
  full.basis = Eigen::MatrixXd::Identity(n, n);  // P = I
  CHECK(music_value(Vec3(0.1, 0, 0), full, cfg.array.receivers) == kMusicValueCap);

  SignalProjector empty;
  empty.basis = Eigen::MatrixXd::Zero(n, 0);  // P = 0
  double norm2 = 0.0;
  for (int l = 0; l < 3; ++l)
    norm2 += steering_column(cfg.array, Vec3(0.1, 0, 0), l).squaredNorm();
  CHECK(music_value(Vec3(0.1, 0, 0), empty, cfg.array.receivers) ==
        doctest::Approx(1.0 / std::sqrt(norm2)).epsilon(1e-12));
}

TEST_CASE("noiseless MUSIC peaks at the inclusion (reference configuration)") {
  const ScenarioConfig cfg = paper_config();
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const SignalProjector proj = signal_projector(a0, 3);
  const MusicImage image = music_scan(cfg.grid, proj, cfg.array.receivers);

  const Vec3 peak = locate(image);
  CHECK((peak - cfg.inclusion.z).cwiseAbs().maxCoeff() <= 0.05 + 1e-12);
  // Sharp peak: orders of magnitude above the median.
  CHECK(peak_to_median(image) > 1e4);
}

TEST_CASE("noiseless MUSIC localizes a translated inclusion") {
  ScenarioConfig cfg = paper_config();
  cfg.inclusion.z = Vec3(0.1, -0.2, 0.15);
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const SignalProjector proj = signal_projector(a0, 3);
  const MusicImage image = music_scan(cfg.grid, proj, cfg.array.receivers);
  const Vec3 spacing = cfg.grid.spacing();
  CHECK(((locate(image) - cfg.inclusion.z).cwiseAbs().array() <= spacing.array() + 1e-12).all());

  // Quadratic refinement beats the raw grid for an off-node center.
  cfg.inclusion.z = Vec3(0.12, -0.18, 0.14);
  const ResponseMatrix a2 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const MusicImage image2 =
      music_scan(cfg.grid, signal_projector(a2, 3), cfg.array.receivers);
  const double raw_err = (locate(image2) - cfg.inclusion.z).norm();
  const double refined_err = (locate_refined(image2) - cfg.inclusion.z).norm();
  CHECK(refined_err < raw_err);
  CHECK(refined_err < 0.5 * spacing.maxCoeff());
}

TEST_CASE("image is invariant under rescaling the measured matrix") {
  // Off-node center: every node is then well-conditioned. (When the
  // center sits exactly on a node, the value there is 1/sqrt(roundoff)
  // and no tolerance applies.)
  ScenarioConfig cfg = paper_config();
  cfg.inclusion.z = Vec3(0.12, -0.18, 0.14);
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const ResponseMatrix scaled(-37.5 * a0.matrix());
  const MusicImage base =
      music_scan(cfg.grid, signal_projector(a0, 3), cfg.array.receivers);
  const MusicImage other =
      music_scan(cfg.grid, signal_projector(scaled, 3), cfg.array.receivers);
  REQUIRE(base.values.size() == other.values.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < base.values.size(); ++i)
    worst = std::max(worst, std::abs(other.values[i] - base.values[i]) / base.values[i]);
  CHECK(worst < 1e-12);
  CHECK(other.argmax_flat == base.argmax_flat);
}

TEST_CASE("locate: single node and tie break") {
  SearchGrid grid;
  grid.counts = {1, 1, 1};
  grid.lo = grid.hi = Vec3(0.3, 0.4, 0.5);
  MusicImage image;
  image.grid = grid;
  image.values = {7.0};
  image.argmax_flat = 0;
  CHECK(locate(image) == Vec3(0.3, 0.4, 0.5));

  SearchGrid line;
  line.counts = {3, 1, 1};
  line.lo = Vec3(0, 0, 0);
  line.hi = Vec3(2, 0, 0);
  MusicImage twin;
  twin.grid = line;
  twin.values = {5.0, 1.0, 5.0};  // symmetric double peak
  twin.argmax_flat = 0;
  for (int i = 1; i < 3; ++i)
    if (twin.values[i] > twin.values[twin.argmax_flat]) twin.argmax_flat = i;
  CHECK(locate(twin) == Vec3(0, 0, 0));  // lowest flat index wins
}

TEST_CASE("noisy localization at ratio 10 stays within two grid spacings" *
          doctest::timeout(600)) {
  ScenarioConfig cfg = paper_config();
  cfg.inclusion.z = Vec3(0.1, -0.05, 0.1);
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const double sigma_n = a0.singular_values()(0) / 10.0;
  const Vec3 spacing = cfg.grid.spacing();

  int good = 0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    const ResponseMatrix meas =
        acquire_hadamard(a0, {sigma_n, static_cast<std::uint64_t>(t)});
    const MusicImage image =
        music_scan(cfg.grid, signal_projector(meas, 3), cfg.array.receivers);
    if (((locate(image) - cfg.inclusion.z).cwiseAbs().array() <= 2.0 * spacing.array() + 1e-12)
            .all())
      ++good;
  }
  CHECK(good >= static_cast<int>(0.95 * trials));
}

TEST_CASE("peak sharpness degrades with noise on average") {
  ScenarioConfig cfg = paper_config();
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const double sigma1 = a0.singular_values()(0);
  double prev = std::numeric_limits<double>::infinity();
  for (double ratio : {30.0, 10.0, 3.0}) {
    double avg = 0.0;
    const int seeds = 5;
    for (int s = 0; s < seeds; ++s) {
      const ResponseMatrix meas =
          acquire_hadamard(a0, {sigma1 / ratio, static_cast<std::uint64_t>(100 + s)});
      avg += peak_to_median(
          music_scan(cfg.grid, signal_projector(meas, 3), cfg.array.receivers));
    }
    avg /= seeds;
    CHECK(avg <= prev * 1.05);  // small slack for Monte Carlo wobble
    prev = avg;
  }
}

TEST_CASE("auto rank picks three spikes on clean data plus noise") {
  const TracyWidomTable tw = tw1_build_table();
  const ScenarioConfig cfg = paper_config();
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const ResponseMatrix meas =
      acquire_hadamard(a0, {a0.singular_values()(0) / 20.0, 7});
  CHECK(auto_signal_rank(meas.singular_values(), meas.cols(), 1.0, 0.05, tw) == 3);

  const ResponseMatrix pure(Eigen::MatrixXd::Zero(64, 64));
  const ResponseMatrix noise = acquire_hadamard(pure, {1.0, 9});
  CHECK(auto_signal_rank(noise.singular_values(), 64, 1.0, 0.01, tw) <= 1);
}

TEST_CASE("parallel and serial scans agree bit-for-bit") {
  const ScenarioConfig cfg = paper_config();
  const ResponseMatrix a0 = response_matrix(cfg.array, cfg.inclusion, cfg.polarization);
  const SignalProjector proj = signal_projector(a0, 3);
  SearchGrid coarse = cfg.grid;
  coarse.counts = {9, 9, 9};
  const MusicImage par = music_scan(coarse, proj, cfg.array.receivers);
  const MusicImage ser = music_scan_serial(coarse, proj, cfg.array.receivers);
  CHECK(par.values == ser.values);
  CHECK(par.argmax_flat == ser.argmax_flat);
}

TEST_CASE("image_slice extracts the z = 0 plane") {
  SearchGrid grid;
  grid.counts = {3, 3, 3};
  grid.lo = Vec3(-1, -1, -1);
  grid.hi = Vec3(1, 1, 1);
  MusicImage image;
  image.grid = grid;
  image.values.assign(27, 1.0);
  const auto rows = image_slice(image, 2, 0.0);
  CHECK(rows.size() == 9);
  for (const auto& r : rows) CHECK(r[2] == 1.0);
}
