#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ecsim {

/// Shortest exact decimal form (17 significant digits), replay-safe.
std::string format_double(double value);

/// FNV-1a 64-bit; used for config hashes in output headers.
std::uint64_t fnv1a64(std::string_view text);

/// Provenance header written as '#' comment lines at the top of every
/// output file: tool version, config hash, seed.
struct OutputMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

std::string meta_header(const OutputMeta& meta);

/// Matrix CSV: meta header, then a "N,M" row, then N rows of M values
/// (row = receiver index, column = source index).
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix,
                      const OutputMeta& meta);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

/// Generic numeric table: meta header, column-name row, data rows.
void write_table_csv(const std::string& path, const OutputMeta& meta,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

}  // namespace ecsim
