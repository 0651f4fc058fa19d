#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ecsim/forward_model.hpp"
#include "ecsim/tracy_widom.hpp"

namespace ecsim {

/// Axis-aligned search box sampled on a regular grid.
/// Flat index = (ix * ny + iy) * nz + iz; argmax ties break toward the
/// smallest flat index.
struct SearchGrid {
  Vec3 lo = Vec3(-0.5, -0.5, -0.5);
  Vec3 hi = Vec3(0.5, 0.5, 0.5);
  std::array<int, 3> counts = {21, 21, 21};

  int num_nodes() const { return counts[0] * counts[1] * counts[2]; }
  Vec3 spacing() const;
  Vec3 node(int flat) const;
  std::array<int, 3> indices(int flat) const;

  void validate() const;  // throws config_error
};

struct MusicImage {
  SearchGrid grid;
  std::vector<double> values;  // per flat index
  int argmax_flat = 0;

  Vec3 argmax_point() const { return grid.node(argmax_flat); }
  double peak_value() const { return values[argmax_flat]; }
};

/// Orthogonal projector onto the leading left-singular subspace, kept in
/// factored form (N x r orthonormal basis) so image scans cost O(N r)
/// per steering vector instead of O(N^2).
struct SignalProjector {
  Eigen::MatrixXd basis;       // N x r, orthonormal columns
  bool rank_deficient = false; // sigma_rank / sigma_1 < 1e-12

  int rank() const { return static_cast<int>(basis.cols()); }
  Eigen::MatrixXd matrix() const { return basis * basis.transpose(); }  // P = U U^T
};

SignalProjector signal_projector(const ResponseMatrix& a_meas, int rank = 3);

/// Number of singular values flagged by the detection test at FAR delta:
/// counts j with sigma_j above r_delta times the truncated bulk level.
int auto_signal_rank(const Eigen::VectorXd& singular_values, int m, double gamma, double delta,
                     const TracyWidomTable& tw);

/// MUSIC functional at a search point:
///   [ sum_{l=1}^3 || (I - P) g_l ||^2 ]^{-1/2},
///   g_l(z)_n = (D^2G(r_n, z) q_n) . e_l.
/// Capped at 1e30 when the residual underflows (search point resolving
/// the true location in exact arithmetic).
double music_value(const Vec3& z_search, const SignalProjector& projector,
                   std::span<const Sensor> receivers);

inline constexpr double kMusicValueCap = 1e30;

/// Evaluates music_value on every grid node. OpenMP-parallel over nodes;
/// `music_scan_serial` is the reference implementation (bit-identical).
MusicImage music_scan(const SearchGrid& grid, const SignalProjector& projector,
                      std::span<const Sensor> receivers);
MusicImage music_scan_serial(const SearchGrid& grid, const SignalProjector& projector,
                             std::span<const Sensor> receivers);

/// Grid node of maximum value.
Vec3 locate(const MusicImage& image);

/// Argmax plus a per-axis 3-point parabola fit through the reciprocal
/// squared values (the MUSIC denominator, smooth near the peak).
Vec3 locate_refined(const MusicImage& image);

double peak_to_median(const MusicImage& image);

/// Extracts the slice axis==value rows as (u, v, value) triples, where
/// (u, v) are the remaining two coordinates. axis: 0=x, 1=y, 2=z.
std::vector<std::array<double, 3>> image_slice(const MusicImage& image, int axis,
                                               double plane);

}  // namespace ecsim
