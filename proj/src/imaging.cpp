#include "ecsim/imaging.hpp"

#include <algorithm>
#include <cmath>

#include "ecsim/detection.hpp"
#include "ecsim/errors.hpp"

namespace ecsim {

Vec3 SearchGrid::spacing() const {
  Vec3 h;
  for (int a = 0; a < 3; ++a)
    h(a) = counts[a] > 1 ? (hi(a) - lo(a)) / (counts[a] - 1) : 0.0;
  return h;
}

std::array<int, 3> SearchGrid::indices(int flat) const {
  const int iz = flat % counts[2];
  const int iy = (flat / counts[2]) % counts[1];
  const int ix = flat / (counts[1] * counts[2]);
  return {ix, iy, iz};
}

Vec3 SearchGrid::node(int flat) const {
  const auto idx = indices(flat);
  const Vec3 h = spacing();
  return Vec3(lo(0) + idx[0] * h(0), lo(1) + idx[1] * h(1), lo(2) + idx[2] * h(2));
}

void SearchGrid::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (counts[a] < 1) throw config_error("search grid counts must be >= 1 per axis");
    if (!(hi(a) >= lo(a))) throw config_error("search box corners are inverted");
    if (counts[a] > 1 && !(hi(a) > lo(a)))
      throw config_error("search box is degenerate along a sampled axis");
  }
}

SignalProjector signal_projector(const ResponseMatrix& a_meas, int rank) {
  const auto& svd = a_meas.svd();
  const int max_rank = static_cast<int>(svd.singular_values.size());
  if (rank < 1 || rank > max_rank)
    throw std::invalid_argument("signal_projector: rank must be in [1, min(N, M)]");
  SignalProjector p;
  p.basis = svd.u.leftCols(rank);
  p.rank_deficient =
      svd.singular_values(rank - 1) < 1e-12 * svd.singular_values(0);
  return p;
}

int auto_signal_rank(const Eigen::VectorXd& singular_values, int m, double gamma, double delta,
                     const TracyWidomTable& tw) {
  const double edge = 1.0 + 1.0 / std::sqrt(gamma);
  const double dof = m - 3.0 * edge * edge;
  double bulk = 0.0;
  for (int j = 3; j < m; ++j) bulk += singular_values(j) * singular_values(j);
  bulk = std::sqrt(bulk / dof);
  if (bulk <= 0.0) return significant_rank(singular_values);
  const double cut = threshold(delta, m, gamma, tw) * bulk;
  int rank = 0;
  for (Eigen::Index j = 0; j < singular_values.size(); ++j)
    if (singular_values(j) > cut) ++rank;
  return rank;
}

namespace {

// Rows of the steering matrix: row n = D^2 G(r_n, z) q_n.
Eigen::MatrixXd steering(const Vec3& z_search, std::span<const Sensor> receivers) {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(receivers.size()), 3);
  for (std::size_t n = 0; n < receivers.size(); ++n)
    g.row(static_cast<Eigen::Index>(n)) =
        (green_hessian(receivers[n].position, z_search) * receivers[n].direction).transpose();
  return g;
}

}  // namespace

double music_value(const Vec3& z_search, const SignalProjector& projector,
                   std::span<const Sensor> receivers) {
  const Eigen::MatrixXd g = steering(z_search, receivers);
  // || (I - P) G ||_F^2 with P = U U^T, evaluated through the basis.
  const Eigen::MatrixXd coeffs = projector.basis.transpose() * g;
  const double denom = (g - projector.basis * coeffs).squaredNorm();
  if (!(denom > 1.0 / (kMusicValueCap * kMusicValueCap))) return kMusicValueCap;
  return 1.0 / std::sqrt(denom);
}

namespace {

template <bool kParallel>
MusicImage scan(const SearchGrid& grid, const SignalProjector& projector,
                std::span<const Sensor> receivers) {
  grid.validate();
  MusicImage image;
  image.grid = grid;
  image.values.assign(grid.num_nodes(), 0.0);
  const int nodes = grid.num_nodes();
#pragma omp parallel for if (kParallel) schedule(static)
  for (int i = 0; i < nodes; ++i)
    image.values[i] = music_value(grid.node(i), projector, receivers);

  image.argmax_flat = 0;
  for (int i = 1; i < nodes; ++i)
    if (image.values[i] > image.values[image.argmax_flat]) image.argmax_flat = i;
  return image;
}

}  // namespace

MusicImage music_scan(const SearchGrid& grid, const SignalProjector& projector,
                      std::span<const Sensor> receivers) {
  return scan<true>(grid, projector, receivers);
}

MusicImage music_scan_serial(const SearchGrid& grid, const SignalProjector& projector,
                             std::span<const Sensor> receivers) {
  return scan<false>(grid, projector, receivers);
}

Vec3 locate(const MusicImage& image) {
  if (image.values.empty()) throw std::invalid_argument("locate: empty image");
  return image.argmax_point();
}

Vec3 locate_refined(const MusicImage& image) {
  if (image.values.empty()) throw std::invalid_argument("locate: empty image");
  const SearchGrid& grid = image.grid;
  const auto idx = grid.indices(image.argmax_flat);
  const Vec3 h = grid.spacing();
  Vec3 point = image.argmax_point();

  const auto value_at = [&](int ix, int iy, int iz) {
    return image.values[(ix * grid.counts[1] + iy) * grid.counts[2] + iz];
  };
  // Fit the parabola to 1/value^2: the MUSIC denominator is smooth and
  // close to quadratic around its zero, unlike the spiked value itself.
  const auto denom_at = [&](int ix, int iy, int iz) {
    const double v = value_at(ix, iy, iz);
    return 1.0 / (v * v);
  };

  for (int a = 0; a < 3; ++a) {
    if (idx[a] <= 0 || idx[a] >= grid.counts[a] - 1) continue;  // peak on a face
    std::array<int, 3> im = idx, ip = idx;
    --im[a];
    ++ip[a];
    const double dm = denom_at(im[0], im[1], im[2]);
    const double d0 = denom_at(idx[0], idx[1], idx[2]);
    const double dp = denom_at(ip[0], ip[1], ip[2]);
    const double curv = dm - 2.0 * d0 + dp;
    if (!(curv > 0.0)) continue;  // not a local minimum of the denominator
    double offset = 0.5 * (dm - dp) / curv;
    offset = std::clamp(offset, -0.5, 0.5);
    point(a) += offset * h(a);
  }
  return point;
}

double peak_to_median(const MusicImage& image) {
  std::vector<double> copy = image.values;
  const std::size_t mid = copy.size() / 2;
  std::nth_element(copy.begin(), copy.begin() + mid, copy.end());
  const double median = copy[mid];
  return median > 0.0 ? image.peak_value() / median : kMusicValueCap;
}

std::vector<std::array<double, 3>> image_slice(const MusicImage& image, int axis, double plane) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("image_slice: axis must be 0, 1 or 2");
  const SearchGrid& grid = image.grid;
  // Snap to the nearest grid plane.
  const Vec3 h = grid.spacing();
  int plane_idx = 0;
  if (grid.counts[axis] > 1 && h(axis) > 0.0) {
    plane_idx = static_cast<int>(std::lround((plane - grid.lo(axis)) / h(axis)));
    plane_idx = std::clamp(plane_idx, 0, grid.counts[axis] - 1);
  }
  std::vector<std::array<double, 3>> rows;
  for (int i = 0; i < grid.num_nodes(); ++i) {
    const auto idx = grid.indices(i);
    if (idx[axis] != plane_idx) continue;
    const Vec3 p = grid.node(i);
    std::array<double, 3> row{};
    int c = 0;
    for (int a = 0; a < 3; ++a)
      if (a != axis) row[c++] = p(a);
    row[2] = image.values[i];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ecsim
